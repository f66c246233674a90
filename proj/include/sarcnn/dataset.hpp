#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "sarcnn/cnn/trainer.hpp"
#include "sarcnn/matrix.hpp"
#include "sarcnn/random.hpp"
#include "sarcnn/scene.hpp"

namespace sarcnn {

enum class Task : std::uint8_t { custom = 0, shape = 1, multiscatterer = 2, radius = 3, count = 4, ice = 5 };
enum class InputMode : std::uint8_t { raw = 0, backprojected = 1 };

inline const char* to_string(Task task) {
    switch (task) {
        case Task::custom: return "custom";
        case Task::shape: return "shape";
        case Task::multiscatterer: return "multiscatterer";
        case Task::radius: return "radius";
        case Task::count: return "count";
        case Task::ice: return "ice";
    }
    return "custom";
}

inline Task task_from_string(const std::string& name) {
    for (Task t : {Task::custom, Task::shape, Task::multiscatterer, Task::radius, Task::count, Task::ice})
        if (name == to_string(t)) return t;
    fail(ErrorCode::invalid_argument, "unknown task '" + name + "'");
}

inline const char* to_string(InputMode mode) { return mode == InputMode::raw ? "raw" : "backprojected"; }

inline InputMode mode_from_string(const std::string& name) {
    if (name == "raw") return InputMode::raw;
    if (name == "backprojected") return InputMode::backprojected;
    fail(ErrorCode::invalid_argument, "unknown mode '" + name + "' (expected raw or backprojected)");
}

/// Enough to regenerate a simulated sample: its own seed plus the scene it drew.
struct Provenance {
    Task task = Task::custom;
    double height = 0.0;
    std::uint64_t seed = 0;
    InputMode mode = InputMode::raw;
    std::vector<ShapeSpec> shapes;
    std::string source;  // file of origin for loaded imagery

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Sample {
    Matrix<float> input;
    std::size_t label = 1;  // 1-based
    Provenance provenance;
};

struct Splits {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;

    friend bool operator==(const Splits&, const Splits&) = default;
};

struct LabeledDataset {
    Task task = Task::custom;
    std::size_t class_count = 0;
    std::vector<Sample> samples;
    Splits splits;
    nlohmann::json meta = nlohmann::json::object();  // generation config echo

    std::size_t size() const { return samples.size(); }

    std::vector<std::size_t> class_counts() const {
        std::vector<std::size_t> counts(class_count, 0);
        for (const auto& s : samples) ++counts[s.label - 1];
        return counts;
    }

    void validate() const {
        require(class_count >= 1, "dataset: class count must be positive");
        for (const auto& s : samples) {
            require(s.label >= 1 && s.label <= class_count, "dataset: label out of range");
            for (float v : s.input.values()) require(std::isfinite(v), "dataset: non-finite input value");
        }
        std::vector<int> seen(samples.size(), 0);
        for (const auto* part : {&splits.train, &splits.validation, &splits.test}) {
            for (std::size_t idx : *part) {
                require(idx < samples.size(), "dataset: split index out of range");
                require(seen[idx]++ == 0, "dataset: splits overlap");
            }
        }
    }
};

/// Stratified split: each class is shuffled with its own stream and cut into
/// round(f_train * n_c), round(f_val * n_c) and the remainder. Each split lists indices in
/// ascending order.
inline Splits split(const std::vector<std::size_t>& labels, std::size_t class_count, std::array<double, 3> fractions,
                    std::uint64_t seed) {
    for (double f : fractions) require(f >= 0.0 && f <= 1.0, "split: fractions must lie in [0, 1]");
    require(std::abs(fractions[0] + fractions[1] + fractions[2] - 1.0) < 1e-9, "split: fractions must sum to 1");

    std::vector<std::vector<std::size_t>> by_class(class_count);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        require(labels[i] >= 1 && labels[i] <= class_count, "split: label out of range");
        by_class[labels[i] - 1].push_back(i);
    }
    Splits out;
    for (std::size_t c = 0; c < class_count; ++c) {
        auto& members = by_class[c];
        Rng rng(derive_seed(seed, 0x5b117, c));
        shuffle(members, rng);
        const auto n = static_cast<double>(members.size());
        const auto n_train = std::min(members.size(), static_cast<std::size_t>(std::llround(fractions[0] * n)));
        const auto n_val =
            std::min(members.size() - n_train, static_cast<std::size_t>(std::llround(fractions[1] * n)));
        out.train.insert(out.train.end(), members.begin(), members.begin() + n_train);
        out.validation.insert(out.validation.end(), members.begin() + n_train, members.begin() + n_train + n_val);
        out.test.insert(out.test.end(), members.begin() + n_train + n_val, members.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.validation.begin(), out.validation.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

inline constexpr std::array<double, 3> default_fractions{0.8, 0.1, 0.1};

inline void split(LabeledDataset& dataset, std::array<double, 3> fractions, std::uint64_t seed) {
    std::vector<std::size_t> labels;
    labels.reserve(dataset.size());
    for (const auto& s : dataset.samples) labels.push_back(s.label);
    dataset.splits = split(labels, dataset.class_count, fractions, seed);
}

/// Network inputs for the given sample indices; with normalize, each input is min-max
/// scaled to [0, 1] (a constant input becomes zeros).
template <typename T>
cnn::LabeledTensors<T> to_tensors(const LabeledDataset& dataset, const std::vector<std::size_t>& indices,
                                  bool normalize = true) {
    cnn::LabeledTensors<T> out;
    out.inputs.reserve(indices.size());
    out.labels.reserve(indices.size());
    for (std::size_t idx : indices) {
        require(idx < dataset.size(), "to_tensors: index out of range");
        Matrix<T> m = dataset.samples[idx].input.template cast<T>();
        if (normalize) rescale_unit(m);
        out.inputs.push_back(cnn::Tensor<T>::from_matrix(m));
        out.labels.push_back(dataset.samples[idx].label);
    }
    return out;
}

// JSON encodings used in container metadata.

inline nlohmann::json to_json(const ShapeSpec& s) {
    nlohmann::json j;
    j["kind"] = s.name();
    j["center"] = {s.center.x, s.center.y};
    std::visit(
        [&](const auto& k) {
            using S = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<S, Circle>) j["radius"] = k.radius;
            if constexpr (std::is_same_v<S, Square>) j["side"] = k.side;
            if constexpr (std::is_same_v<S, Ellipse>) {
                j["a"] = k.a;
                j["b"] = k.b;
            }
            if constexpr (std::is_same_v<S, Rhombus>) j["d"] = k.d;
        },
        s.kind);
    return j;
}

inline ShapeSpec shape_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    const Point2 c{j.at("center").at(0).get<double>(), j.at("center").at(1).get<double>()};
    if (kind == "circle") return circle(j.at("radius").get<double>(), c);
    if (kind == "square") return square(j.at("side").get<double>(), c);
    if (kind == "ellipse") return ellipse(j.at("a").get<double>(), j.at("b").get<double>(), c);
    if (kind == "rhombus") return rhombus(j.at("d").get<double>(), c);
    fail(ErrorCode::format, "unknown shape kind '" + kind + "'");
}

inline nlohmann::json to_json(const Provenance& p) {
    nlohmann::json j;
    j["task"] = to_string(p.task);
    j["height"] = p.height;
    j["seed"] = p.seed;
    j["mode"] = to_string(p.mode);
    j["shapes"] = nlohmann::json::array();
    for (const auto& s : p.shapes) j["shapes"].push_back(to_json(s));
    if (!p.source.empty()) j["source"] = p.source;
    return j;
}

inline Provenance provenance_from_json(const nlohmann::json& j) {
    Provenance p;
    p.task = task_from_string(j.at("task").get<std::string>());
    p.height = j.at("height").get<double>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.mode = mode_from_string(j.at("mode").get<std::string>());
    for (const auto& s : j.at("shapes")) p.shapes.push_back(shape_from_json(s));
    if (j.contains("source")) p.source = j.at("source").get<std::string>();
    return p;
}

}  // namespace sarcnn
