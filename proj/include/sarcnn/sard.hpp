#pragma once

// SARD container: one little-endian binary format for datasets, model checkpoints and
// single images.
//
//   "SARD" | u8 version (1) | u8 kind (1 dataset, 2 checkpoint, 3 image) | body
//
// dataset body:
//   u8 task | u16 classes | u32 rows | u32 cols | u32 samples
//   u32 n_train | u32 n_val | u32 n_test | u32 indices (train, then validation, then test)
//   u32 meta length | meta (UTF-8 JSON)
//   per sample: u8 label | rows * cols f32, row-major
//
// checkpoint body:
//   u32 meta length | meta (UTF-8 JSON)
//   u32 tensor count | per tensor: u16 name length | name | u8 dtype (1 f32, 2 f64)
//                                  | u8 rank | u32 dims[rank] | values, row-major
//
// image body:
//   u32 rows | u32 cols | u32 meta length | meta | rows * cols f32, row-major

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "sarcnn/cnn/params.hpp"
#include "sarcnn/dataset.hpp"

namespace sarcnn::sard {

inline constexpr std::uint8_t version = 1;
enum class Kind : std::uint8_t { dataset = 1, checkpoint = 2, image = 3 };
enum class DType : std::uint8_t { f32 = 1, f64 = 2 };

using Bytes = std::vector<std::uint8_t>;

class Writer {
public:
    explicit Writer(Kind kind) {
        bytes_.insert(bytes_.end(), {'S', 'A', 'R', 'D'});
        u8(version);
        u8(static_cast<std::uint8_t>(kind));
    }

    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u16(std::uint16_t v) { put_le(v, 2); }
    void u32(std::uint64_t v) {
        require(v <= UINT32_MAX, "SARD: value does not fit in 32 bits");
        put_le(v, 4);
    }
    void f32(float v) { put_le(std::bit_cast<std::uint32_t>(v), 4); }
    void f64(double v) { put_le(std::bit_cast<std::uint64_t>(v), 8); }
    void text(std::string_view s) {
        u32(s.size());
        bytes_.insert(bytes_.end(), s.begin(), s.end());
    }
    void name(std::string_view s) {
        require(s.size() <= UINT16_MAX, "SARD: name too long");
        u16(static_cast<std::uint16_t>(s.size()));
        bytes_.insert(bytes_.end(), s.begin(), s.end());
    }

    const Bytes& bytes() const { return bytes_; }
    Bytes take() { return std::move(bytes_); }

private:
    void put_le(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    Bytes bytes_;
};

class Reader {
public:
    Reader(const Bytes& bytes, Kind expected) : bytes_(bytes) {
        if (bytes_.size() < 6 || std::memcmp(bytes_.data(), "SARD", 4) != 0)
            fail(ErrorCode::format, "SARD: bad magic");
        pos_ = 4;
        const std::uint8_t v = u8();
        if (v != version) fail(ErrorCode::format, "SARD: unsupported version " + std::to_string(v));
        const std::uint8_t k = u8();
        if (k != static_cast<std::uint8_t>(expected))
            fail(ErrorCode::format, "SARD: unexpected container kind " + std::to_string(k));
    }

    std::uint8_t u8() { return static_cast<std::uint8_t>(get_le(1)); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(get_le(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get_le(4)); }
    float f32() { return std::bit_cast<float>(static_cast<std::uint32_t>(get_le(4))); }
    double f64() { return std::bit_cast<double>(get_le(8)); }
    std::string text() { return take_string(u32()); }
    std::string name() { return take_string(u16()); }

    void need(std::uint64_t n) const {
        if (pos_ + n > bytes_.size()) fail(ErrorCode::format, "SARD: truncated container");
    }
    bool at_end() const { return pos_ == bytes_.size(); }

private:
    std::uint64_t get_le(int n) {
        need(static_cast<std::uint64_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    std::string take_string(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }

    const Bytes& bytes_;
    std::size_t pos_ = 0;
};

inline void write_file(const std::filesystem::path& path, const Bytes& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::io, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::io, "failed writing " + path.string());
}

inline Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io, "cannot open " + path.string());
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Datasets.

inline Bytes encode_dataset(const LabeledDataset& ds) {
    ds.validate();
    require(ds.class_count <= UINT16_MAX, "SARD: too many classes");
    const std::size_t rows = ds.samples.empty() ? 0 : ds.samples.front().input.rows();
    const std::size_t cols = ds.samples.empty() ? 0 : ds.samples.front().input.cols();
    Writer w(Kind::dataset);
    w.u8(static_cast<std::uint8_t>(ds.task));
    w.u16(static_cast<std::uint16_t>(ds.class_count));
    w.u32(rows);
    w.u32(cols);
    w.u32(ds.samples.size());
    w.u32(ds.splits.train.size());
    w.u32(ds.splits.validation.size());
    w.u32(ds.splits.test.size());
    for (const auto* part : {&ds.splits.train, &ds.splits.validation, &ds.splits.test})
        for (std::size_t idx : *part) w.u32(idx);

    nlohmann::json meta = ds.meta;
    meta["provenance"] = nlohmann::json::array();
    for (const auto& s : ds.samples) meta["provenance"].push_back(to_json(s.provenance));
    w.text(meta.dump());

    for (const auto& s : ds.samples) {
        require(s.input.rows() == rows && s.input.cols() == cols, "SARD: samples differ in size");
        require(s.label <= UINT8_MAX, "SARD: label does not fit in a byte");
        w.u8(static_cast<std::uint8_t>(s.label));
        for (float v : s.input.values()) w.f32(v);
    }
    return w.take();
}

inline LabeledDataset decode_dataset(const Bytes& bytes) {
    Reader r(bytes, Kind::dataset);
    LabeledDataset ds;
    ds.task = static_cast<Task>(r.u8());
    ds.class_count = r.u16();
    const std::size_t rows = r.u32();
    const std::size_t cols = r.u32();
    const std::size_t n = r.u32();
    const std::size_t n_train = r.u32();
    const std::size_t n_val = r.u32();
    const std::size_t n_test = r.u32();
    r.need(4 * (n_train + n_val + n_test));
    for (auto [part, count] : {std::pair{&ds.splits.train, n_train}, std::pair{&ds.splits.validation, n_val},
                               std::pair{&ds.splits.test, n_test}}) {
        part->reserve(count);
        for (std::size_t i = 0; i < count; ++i) part->push_back(r.u32());
    }
    try {
        ds.meta = nlohmann::json::parse(r.text());
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::format, std::string("SARD: bad metadata: ") + e.what());
    }
    r.need(n * (1 + 4 * rows * cols));
    ds.samples.resize(n);
    for (auto& s : ds.samples) {
        s.label = r.u8();
        s.input = Matrix<float>(rows, cols);
        for (float& v : s.input.values()) v = r.f32();
    }
    if (!r.at_end()) fail(ErrorCode::format, "SARD: trailing bytes after dataset");

    if (ds.meta.contains("provenance")) {
        const auto& prov = ds.meta["provenance"];
        if (!prov.is_array() || prov.size() != n) fail(ErrorCode::format, "SARD: provenance does not match samples");
        try {
            for (std::size_t i = 0; i < n; ++i) ds.samples[i].provenance = provenance_from_json(prov[i]);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::format, std::string("SARD: bad provenance: ") + e.what());
        }
        ds.meta.erase("provenance");
    }
    try {
        ds.validate();
    } catch (const Error& e) {
        fail(ErrorCode::format, std::string("SARD: ") + e.what());
    }
    return ds;
}

inline void write_dataset(const std::filesystem::path& path, const LabeledDataset& ds) {
    write_file(path, encode_dataset(ds));
}
inline LabeledDataset read_dataset(const std::filesystem::path& path) { return decode_dataset(read_file(path)); }

// Checkpoints.

template <typename T>
struct Checkpoint {
    cnn::ModelParams<T> params;
    nlohmann::json meta = nlohmann::json::object();
};

inline nlohmann::json to_json(const cnn::Hyper& h) {
    return {{"input_size", h.input_size}, {"filter_size", h.filter_size}, {"filters", h.filters},
            {"classes", h.classes},       {"bn_epsilon", h.bn_epsilon}};
}

inline cnn::Hyper hyper_from_json(const nlohmann::json& j) {
    cnn::Hyper h;
    h.input_size = j.at("input_size").get<std::size_t>();
    h.filter_size = j.at("filter_size").get<std::size_t>();
    h.filters = j.at("filters").get<std::size_t>();
    h.classes = j.at("classes").get<std::size_t>();
    h.bn_epsilon = j.at("bn_epsilon").get<double>();
    return h;
}

template <typename T>
Bytes encode_checkpoint(const Checkpoint<T>& ck) {
    const auto& p = ck.params;
    const auto& h = p.hyper;
    nlohmann::json meta = ck.meta;
    meta["hyper"] = to_json(h);
    meta["has_running_stats"] = p.has_running_stats;

    Writer w(Kind::checkpoint);
    w.text(meta.dump());
    struct Record {
        std::string_view name;
        const std::vector<T>* values;
        std::vector<std::size_t> dims;
    };
    const std::size_t kf = h.filter_size;
    const std::vector<Record> records{
        {"conv_weights", &p.theta.conv_weights, {h.filters, kf, kf}},
        {"conv_bias", &p.theta.conv_bias, {h.filters}},
        {"bn_scale", &p.theta.bn_scale, {h.filters}},
        {"bn_offset", &p.theta.bn_offset, {h.filters}},
        {"bn_running_mean", &p.bn_running_mean, {h.filters}},
        {"bn_running_var", &p.bn_running_var, {h.filters}},
        {"fc_weights", &p.theta.fc_weights, {h.classes, h.features()}},
        {"fc_bias", &p.theta.fc_bias, {h.classes}},
    };
    w.u32(records.size());
    for (const auto& rec : records) {
        std::size_t expected = 1;
        for (std::size_t d : rec.dims) expected *= d;
        require(rec.values->size() == expected, "checkpoint: tensor " + std::string(rec.name) + " has wrong size");
        w.name(rec.name);
        w.u8(static_cast<std::uint8_t>(std::is_same_v<T, float> ? DType::f32 : DType::f64));
        w.u8(static_cast<std::uint8_t>(rec.dims.size()));
        for (std::size_t d : rec.dims) w.u32(d);
        for (T v : *rec.values) {
            if constexpr (std::is_same_v<T, float>) w.f32(v);
            else w.f64(v);
        }
    }
    return w.take();
}

template <typename T>
Checkpoint<T> decode_checkpoint(const Bytes& bytes) {
    Reader r(bytes, Kind::checkpoint);
    Checkpoint<T> ck;
    try {
        ck.meta = nlohmann::json::parse(r.text());
        ck.params.hyper = hyper_from_json(ck.meta.at("hyper"));
        ck.params.has_running_stats = ck.meta.at("has_running_stats").template get<bool>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::format, std::string("checkpoint: bad metadata: ") + e.what());
    }
    try {
        ck.params.hyper.validate();
    } catch (const Error& e) {
        fail(ErrorCode::format, std::string("checkpoint: ") + e.what());
    }
    ck.params.theta = cnn::Parameters<T>::zeros(ck.params.hyper);
    ck.params.bn_running_mean.assign(ck.params.hyper.filters, T{0});
    ck.params.bn_running_var.assign(ck.params.hyper.filters, T{0});

    auto target = [&](const std::string& name) -> std::vector<T>* {
        if (name == "bn_running_mean") return &ck.params.bn_running_mean;
        if (name == "bn_running_var") return &ck.params.bn_running_var;
        std::vector<T>* found = nullptr;
        ck.params.theta.for_each([&](std::string_view n, std::vector<T>& v) {
            if (n == name) found = &v;
        });
        return found;
    };

    const std::uint32_t count = r.u32();
    std::vector<std::string> seen;
    for (std::uint32_t t = 0; t < count; ++t) {
        const std::string name = r.name();
        const auto dtype = static_cast<DType>(r.u8());
        if (dtype != DType::f32 && dtype != DType::f64) fail(ErrorCode::format, "checkpoint: unknown dtype");
        const std::uint8_t rank = r.u8();
        std::size_t n = 1;
        for (std::uint8_t d = 0; d < rank; ++d) n *= r.u32();
        std::vector<T>* dst = target(name);
        if (!dst) fail(ErrorCode::format, "checkpoint: unknown tensor '" + name + "'");
        if (dst->size() != n) fail(ErrorCode::format, "checkpoint: tensor '" + name + "' has the wrong shape");
        for (T& v : *dst) v = static_cast<T>(dtype == DType::f32 ? static_cast<double>(r.f32()) : r.f64());
        seen.push_back(name);
    }
    if (seen.size() != 8) fail(ErrorCode::format, "checkpoint: expected 8 tensors");
    if (!r.at_end()) fail(ErrorCode::format, "checkpoint: trailing bytes");
    ck.meta.erase("hyper");
    ck.meta.erase("has_running_stats");
    return ck;
}

template <typename T>
void write_checkpoint(const std::filesystem::path& path, const Checkpoint<T>& ck) {
    write_file(path, encode_checkpoint(ck));
}
template <typename T>
Checkpoint<T> read_checkpoint(const std::filesystem::path& path) {
    return decode_checkpoint<T>(read_file(path));
}

// Single images.

inline Bytes encode_image(const Matrix<float>& image, const nlohmann::json& meta = nlohmann::json::object()) {
    Writer w(Kind::image);
    w.u32(image.rows());
    w.u32(image.cols());
    w.text(meta.dump());
    for (float v : image.values()) w.f32(v);
    return w.take();
}

inline Matrix<float> decode_image(const Bytes& bytes, nlohmann::json* meta = nullptr) {
    Reader r(bytes, Kind::image);
    const std::size_t rows = r.u32();
    const std::size_t cols = r.u32();
    const std::string text = r.text();
    if (meta) {
        try {
            *meta = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::format, std::string("image: bad metadata: ") + e.what());
        }
    }
    r.need(4 * rows * cols);
    Matrix<float> m(rows, cols);
    for (float& v : m.values()) v = r.f32();
    if (!r.at_end()) fail(ErrorCode::format, "image: trailing bytes");
    return m;
}

}  // namespace sarcnn::sard
