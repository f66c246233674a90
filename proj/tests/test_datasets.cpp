#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "sarcnn/datasets.hpp"

using namespace sarcnn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("sarcnn_test_datasets_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<std::size_t> labels_of(std::size_t classes, std::size_t per_class) {
    std::vector<std::size_t> labels;
    for (std::size_t c = 1; c <= classes; ++c) labels.insert(labels.end(), per_class, c);
    return labels;
}

double radius_of(const ShapeSpec& s) { return std::get<Circle>(s.kind).radius; }

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::state;
}

}  // namespace

TEST(Split, SizesForEveryTask) {
    struct Case {
        std::size_t classes, per_class, train, val, test;
    };
    for (const auto& c : {Case{4, 1000, 3200, 400, 400}, Case{2, 2500, 4000, 500, 500}, Case{4, 1250, 4000, 500, 500},
                          Case{3, 2000, 4800, 600, 600}, Case{8, 1170, 7488, 936, 936}}) {
        const auto s = split(labels_of(c.classes, c.per_class), c.classes, default_fractions, 7);
        EXPECT_EQ(s.train.size(), c.train);
        EXPECT_EQ(s.validation.size(), c.val);
        EXPECT_EQ(s.test.size(), c.test);
    }
}

TEST(Split, StratifiedDisjointAndCovering) {
    const auto labels = labels_of(4, 50);
    const auto s = split(labels, 4, default_fractions, 3);
    std::set<std::size_t> all;
    for (const auto* part : {&s.train, &s.validation, &s.test}) {
        std::vector<std::size_t> per_class(4, 0);
        for (std::size_t i : *part) {
            EXPECT_TRUE(all.insert(i).second);
            ++per_class[labels[i] - 1];
        }
        for (std::size_t c = 1; c < 4; ++c) EXPECT_EQ(per_class[c], per_class[0]);
        EXPECT_TRUE(std::is_sorted(part->begin(), part->end()));
    }
    EXPECT_EQ(all.size(), labels.size());
    EXPECT_EQ(split(labels, 4, default_fractions, 3).train, s.train);
    EXPECT_NE(split(labels, 4, default_fractions, 4).train, s.train);
}

TEST(Split, TinyClassesAndBadFractions) {
    // Three samples per class: rounding gives 2 train, 0 validation, 1 test.
    const auto s = split(labels_of(2, 3), 2, default_fractions, 0);
    EXPECT_EQ(s.train.size(), 4u);
    EXPECT_EQ(s.validation.size(), 0u);
    EXPECT_EQ(s.test.size(), 2u);
    EXPECT_THROW(split(labels_of(2, 3), 2, {0.5, 0.5, 0.5}, 0), Error);
    EXPECT_THROW(split(std::vector<std::size_t>{3}, 2, default_fractions, 0), Error);
}

TEST(ShapeDataset, CountsMetadataAndDeterminism) {
    const auto a = gen_shape_dataset(3, 5.0, InputMode::raw, 11);
    EXPECT_EQ(a.size(), 12u);
    EXPECT_EQ(a.class_count, 4u);
    EXPECT_EQ(a.class_counts(), (std::vector<std::size_t>{3, 3, 3, 3}));
    EXPECT_EQ(a.samples.front().input.rows(), 100u);
    EXPECT_EQ(a.samples.front().input.cols(), 100u);
    EXPECT_EQ(a.meta.at("n_per_class"), 3);
    EXPECT_EQ(a.meta.at("height"), 5.0);
    EXPECT_EQ(a.meta.at("mode"), "raw");
    EXPECT_EQ(a.splits.train.size() + a.splits.validation.size() + a.splits.test.size(), 12u);
    for (const auto& s : a.samples) {
        ASSERT_EQ(s.provenance.shapes.size(), 1u);
        const auto c = s.provenance.shapes[0].center;
        EXPECT_TRUE(c.x >= 3.0 && c.x <= 6.0 && c.y >= 3.0 && c.y <= 6.0);
        EXPECT_EQ(s.provenance.shapes[0].kind.index(), s.label - 1);
    }
    const auto b = gen_shape_dataset(3, 5.0, InputMode::raw, 11);
    EXPECT_EQ(sard::encode_dataset(a), sard::encode_dataset(b));
    const auto c = gen_shape_dataset(3, 5.0, InputMode::raw, 12);
    EXPECT_NE(a.samples[0].input, c.samples[0].input);
}

TEST(ShapeDataset, PairedModesShareScenesAndRegenerate) {
    const auto paired = gen_shape_datasets_paired(1, 5.0, 4);
    ASSERT_EQ(paired.raw.size(), paired.backprojected.size());
    EXPECT_EQ(paired.raw.splits.train, paired.backprojected.splits.train);
    const SimulationSetup setup;
    for (std::size_t i = 0; i < paired.raw.size(); ++i) {
        const auto& r = paired.raw.samples[i];
        const auto& b = paired.backprojected.samples[i];
        EXPECT_EQ(r.provenance.shapes, b.provenance.shapes);
        EXPECT_EQ(r.label, b.label);
        EXPECT_EQ(regenerate_input(r.provenance, setup), r.input);
        EXPECT_EQ(regenerate_input(b.provenance, setup), b.input);
        float lo = 1e9f, hi = -1e9f;
        for (float v : b.input.values()) lo = std::min(lo, v), hi = std::max(hi, v);
        EXPECT_EQ(lo, 0.0f);
        EXPECT_EQ(hi, 1.0f);
    }
}

TEST(ShapeDataset, FixedTimeAxisIsNearlyBlind) {
    // At h = 5 the [5, 23] window reaches ground range sqrt(11.5^2 - 25) ~ 10.4 from the
    // track, so only the far rim of shapes near (6, 6) ever registers.
    SimulationSetup setup;
    setup.time_axis = TimeAxisPolicy::fixed;
    const auto ds = gen_shape_dataset(5, 5.0, InputMode::raw, 0, setup);
    EXPECT_EQ(ds.meta.at("setup").at("time_axis"), "fixed");
    EXPECT_EQ(ds.meta.at("time_axis").at("t_min"), 5.0);
    EXPECT_EQ(ds.meta.at("time_axis").at("t_max"), 23.0);
    std::size_t nonzero = 0, total = 0;
    for (const auto& s : ds.samples)
        for (float v : s.input.values()) {
            nonzero += v != 0.0f;
            ++total;
        }
    EXPECT_LT(static_cast<double>(nonzero) / static_cast<double>(total), 0.01);
}

TEST(MultiscattererDataset, DisjointBumpsAndCentreRanges) {
    EXPECT_TRUE(multiscatterer_disjoint(2.0));
    EXPECT_FALSE(multiscatterer_disjoint(15.0));
    const auto ds = gen_multiscatterer_dataset(2.0, 20, 5);
    EXPECT_EQ(ds.class_counts(), (std::vector<std::size_t>{20, 20}));
    for (const auto& s : ds.samples) {
        ASSERT_EQ(s.provenance.shapes.size(), s.label);
        const auto a = s.provenance.shapes[0].center;
        EXPECT_TRUE(a.x >= 0 && a.x <= 5 && a.y >= 0 && a.y <= 5);
        for (const auto& sh : s.provenance.shapes) EXPECT_EQ(radius_of(sh), 2.0);
        if (s.label == 2) {
            const auto b = s.provenance.shapes[1].center;
            EXPECT_TRUE(b.x >= -4 && b.x <= -1 && b.y >= -4 && b.y <= -1);
            EXPECT_GT(std::hypot(a.x - b.x, a.y - b.y), 4.0);
        }
    }
    // Large bumps cannot be separated; generation still succeeds with overlap.
    const auto big = gen_multiscatterer_dataset(15.0, 2, 5);
    EXPECT_EQ(big.meta.at("params").at("disjoint"), false);
    EXPECT_EQ(big.size(), 4u);
}

TEST(RadiusDataset, LabelsMatchRadiiAndEnergyGrows) {
    const auto ds = gen_radius_dataset(1, 2);
    ASSERT_EQ(ds.size(), 4u);
    for (const auto& s : ds.samples) EXPECT_EQ(radius_of(s.provenance.shapes[0]), radius_classes[s.label - 1]);
    // Same centre, growing radius: the disks nest, so the recorded energy grows.
    const SimulationSetup setup;
    double previous = 0.0;
    for (double r : radius_classes) {
        const auto scene = simulate_scene({circle(r, {4.0, 4.0})}, 0.0, setup, setup.axis(0.0), false);
        double energy = 0.0;
        for (double v : scene.raw.values.values()) energy += v * v;
        EXPECT_GT(energy, previous);
        previous = energy;
    }
}

TEST(CountDataset, DisjointBumpsInsideGrid) {
    const auto ds = gen_count_dataset(9, 8);
    EXPECT_EQ(ds.class_counts(), (std::vector<std::size_t>{3, 3, 3}));
    for (const auto& s : ds.samples) {
        ASSERT_EQ(s.provenance.shapes.size(), s.label);
        for (std::size_t i = 0; i < s.label; ++i) {
            const auto a = s.provenance.shapes[i].center;
            EXPECT_TRUE(std::abs(a.x) <= 8.0 && std::abs(a.y) <= 8.0);
            for (std::size_t j = i + 1; j < s.label; ++j) {
                const auto b = s.provenance.shapes[j].center;
                EXPECT_GT(std::hypot(a.x - b.x, a.y - b.y), 4.0);
            }
        }
    }
    EXPECT_THROW(gen_count_dataset(10, 0), Error);
    Rng rng(0);
    EXPECT_EQ(code_of([&] { sample_disjoint_centers(3, 4.9, RoiGrid{}, rng); }), ErrorCode::state);
    EXPECT_EQ(code_of([&] { sample_disjoint_centers(1, 11.0, RoiGrid{}, rng); }), ErrorCode::invalid_argument);
}

TEST(Sard, DatasetRoundTrip) {
    const auto dir = scratch("roundtrip");
    const auto ds = gen_radius_dataset(2, 9);
    sard::write_dataset(dir / "r.sard", ds);
    const auto back = sard::read_dataset(dir / "r.sard");
    EXPECT_EQ(back.task, ds.task);
    EXPECT_EQ(back.class_count, ds.class_count);
    EXPECT_EQ(back.meta, ds.meta);
    EXPECT_EQ(back.splits.train, ds.splits.train);
    EXPECT_EQ(back.splits.test, ds.splits.test);
    ASSERT_EQ(back.size(), ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        EXPECT_EQ(back.samples[i].input, ds.samples[i].input);
        EXPECT_EQ(back.samples[i].label, ds.samples[i].label);
        EXPECT_EQ(back.samples[i].provenance.shapes, ds.samples[i].provenance.shapes);
        EXPECT_EQ(back.samples[i].provenance.seed, ds.samples[i].provenance.seed);
    }
    EXPECT_EQ(sard::encode_dataset(back), sard::encode_dataset(ds));
}

TEST(Sard, CheckpointRoundTripBothPrecisions) {
    cnn::Hyper h;
    h.input_size = 20;
    h.filter_size = 5;
    h.filters = 2;
    h.classes = 3;
    auto p = cnn::init_params<double>(h, 3);
    p.bn_running_mean = {0.5, -0.25};
    p.bn_running_var = {2.0, 3.0};
    p.has_running_stats = true;
    const auto bytes = sard::encode_checkpoint<double>({p, {{"note", "x"}}});
    const auto back = sard::decode_checkpoint<double>(bytes);
    EXPECT_EQ(back.params, p);
    EXPECT_EQ(back.meta.at("note"), "x");
    EXPECT_EQ(sard::encode_checkpoint<double>(back), bytes);

    const auto pf = cnn::init_params<float>(h, 3);
    const auto backf = sard::decode_checkpoint<float>(sard::encode_checkpoint<float>({pf, {}}));
    EXPECT_EQ(backf.params.theta, pf.theta);
    EXPECT_FALSE(backf.params.has_running_stats);
}

TEST(Sard, ImageRoundTrip) {
    Matrix<float> m(3, 5);
    for (std::size_t i = 0; i < 15; ++i) m.values()[i] = static_cast<float>(i) / 7.0f;
    nlohmann::json meta;
    EXPECT_EQ(sard::decode_image(sard::encode_image(m, {{"k", 1}}), &meta), m);
    EXPECT_EQ(meta.at("k"), 1);
}

TEST(Sard, CorruptFilesRaiseFormatErrors) {
    const auto ds = gen_radius_dataset(1, 1);
    const auto good = sard::encode_dataset(ds);
    auto bad_magic = good;
    bad_magic[0] = 'X';
    auto bad_version = good;
    bad_version[4] = 99;
    auto truncated = good;
    truncated.resize(good.size() / 2);
    auto trailing = good;
    trailing.push_back(0);
    for (const auto* bytes : {&bad_magic, &bad_version, &truncated, &trailing})
        EXPECT_EQ(code_of([&] { sard::decode_dataset(*bytes); }), ErrorCode::format);
    // A dataset container is not a checkpoint.
    EXPECT_EQ(code_of([&] { sard::decode_checkpoint<double>(good); }), ErrorCode::format);
    EXPECT_EQ(code_of([&] { sard::read_dataset("/nonexistent/file.sard"); }), ErrorCode::io);
}

TEST(Pgm, EightAndSixteenBit) {
    Matrix<float> m(2, 3);
    const float pixels[] = {0.0f, 0.25f, 0.5f, 0.75f, 1.0f, 1.0f / 3.0f};
    std::copy(std::begin(pixels), std::end(pixels), m.values().begin());
    for (std::size_t maxval : {255u, 65535u}) {
        const auto bytes = pgm::encode(m, maxval);
        const auto back = pgm::decode(bytes);
        ASSERT_EQ(back.rows(), 2u);
        ASSERT_EQ(back.cols(), 3u);
        for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(back.values()[i], m.values()[i], 0.5 / maxval + 1e-7);
    }
    const std::string text = "P5\n# comment\n2 1\n255\n";
    sard::Bytes hand(text.begin(), text.end());
    hand.push_back(0);
    hand.push_back(255);
    const auto h = pgm::decode(hand);
    EXPECT_EQ(h(0, 0), 0.0f);
    EXPECT_EQ(h(0, 1), 1.0f);
    const std::string p2 = "P2\n1 1\n255\n0";
    EXPECT_EQ(code_of([&] { pgm::decode(sard::Bytes(p2.begin(), p2.end())); }), ErrorCode::format);
    hand.pop_back();
    EXPECT_EQ(code_of([&] { pgm::decode(hand); }), ErrorCode::format);
}

TEST(IceLoader, RoundTripThroughImageDirectory) {
    const auto dir = scratch("ice");
    const auto synth = synthetic_ice_dataset(3, 32, 1);
    write_image_directory(dir, synth);
    EXPECT_EQ(ice_class_counts(dir), std::vector<std::size_t>(8, 3));
    const auto ds = load_ice_dataset(dir, 3, 0, 32);
    EXPECT_EQ(ds.size(), 24u);
    EXPECT_EQ(ds.class_counts(), std::vector<std::size_t>(8, 3));
    for (std::size_t i = 0; i < ds.size(); ++i) {
        EXPECT_EQ(ds.samples[i].label, synth.samples[i].label);
        for (std::size_t k = 0; k < 32 * 32; ++k)
            EXPECT_NEAR(ds.samples[i].input.values()[k], synth.samples[i].input.values()[k], 1e-5);
    }
    // Subsampling picks a deterministic subset.
    const auto two = load_ice_dataset(dir, 2, 5, 32);
    const auto again = load_ice_dataset(dir, 2, 5, 32);
    EXPECT_EQ(two.size(), 16u);
    for (std::size_t i = 0; i < two.size(); ++i) EXPECT_EQ(two.samples[i].provenance.source, again.samples[i].provenance.source);
}

TEST(IceLoader, SardImagesAndAllBlack) {
    const auto dir = scratch("ice_black");
    for (std::size_t c = 1; c <= 8; ++c) {
        fs::create_directories(dir / std::to_string(c));
        sard::write_file(dir / std::to_string(c) / "a.sard", sard::encode_image(Matrix<float>(16, 16, 0.0f)));
    }
    const auto ds = load_ice_dataset(dir, 1, 0, 16);
    const auto t = to_tensors<double>(ds, ds.splits.train);
    for (const auto& x : t.inputs)
        for (double v : x.values()) EXPECT_EQ(v, 0.0);
}

TEST(IceLoader, ErrorsNameTheProblem) {
    const auto dir = scratch("ice_bad");
    auto message = [](const std::function<void()>& f) -> std::string {
        try {
            f();
        } catch (const Error& e) {
            return e.what();
        }
        return "";
    };
    EXPECT_NE(message([&] { load_ice_dataset(dir / "missing", 1, 0); }).find("missing"), std::string::npos);
    EXPECT_NE(message([&] { load_ice_dataset(dir, 1, 0); }).find("/1"), std::string::npos);
    const auto synth = synthetic_ice_dataset(1, 16, 0);
    write_image_directory(dir, synth);
    EXPECT_EQ(code_of([&] { load_ice_dataset(dir, 2, 0, 16); }), ErrorCode::invalid_argument);
    EXPECT_EQ(code_of([&] { load_ice_dataset(dir, 1, 0, 32); }), ErrorCode::format);
    sard::write_file(dir / "3" / "000002.pgm", {'P', '5'});
    EXPECT_EQ(code_of([&] { load_ice_dataset(dir, 1, 0, 16); }), ErrorCode::format);
}

TEST(SyntheticIce, DeterministicAndDistinct) {
    const auto a = synthetic_ice_dataset(2, 24, 3);
    const auto b = synthetic_ice_dataset(2, 24, 3);
    EXPECT_EQ(sard::encode_dataset(a), sard::encode_dataset(b));
    EXPECT_EQ(a.class_counts(), std::vector<std::size_t>(8, 2));
    Rng rng(0);
    EXPECT_THROW(synthetic_texture(9, 8, rng), Error);
}
