#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "sarcnn/backprojection.hpp"
#include "sarcnn/dataset.hpp"
#include "sarcnn/forward_model.hpp"
#include "sarcnn/parallel.hpp"
#include "sarcnn/pgm.hpp"
#include "sarcnn/sard.hpp"
#include "sarcnn/scene.hpp"

namespace sarcnn {

enum class TimeAxisPolicy { geometric, fixed };

/// Acquisition geometry shared by all simulated datasets.
struct SimulationSetup {
    RoiGrid grid{};
    double track_radius = 20.0;
    std::size_t n_positions = 100;
    double wave_speed = 1.0;
    std::size_t n_t = 100;
    TimeAxisPolicy time_axis = TimeAxisPolicy::geometric;
    double tolerance = default_backprojection_tolerance;

    FlightTrack track(double height) const { return {track_radius, height, n_positions, wave_speed}; }

    FastTimeAxis axis(double height) const {
        if (time_axis == TimeAxisPolicy::fixed) return {5.0, 23.0, n_t};
        return default_time_axis(track(height), grid, n_t);
    }

    nlohmann::json to_json() const {
        return {{"grid", {{"z_min", grid.z_min}, {"z_max", grid.z_max}, {"n", grid.n}}},
                {"track_radius", track_radius},
                {"n_positions", n_positions},
                {"wave_speed", wave_speed},
                {"n_t", n_t},
                {"time_axis", time_axis == TimeAxisPolicy::fixed ? "fixed" : "geometric"},
                {"tolerance", tolerance}};
    }

    static SimulationSetup from_json(const nlohmann::json& j) {
        SimulationSetup s;
        s.grid = {j.at("grid").at("z_min").get<double>(), j.at("grid").at("z_max").get<double>(),
                  j.at("grid").at("n").get<std::size_t>()};
        s.track_radius = j.at("track_radius").get<double>();
        s.n_positions = j.at("n_positions").get<std::size_t>();
        s.wave_speed = j.at("wave_speed").get<double>();
        s.n_t = j.at("n_t").get<std::size_t>();
        s.time_axis = j.at("time_axis").get<std::string>() == "fixed" ? TimeAxisPolicy::fixed : TimeAxisPolicy::geometric;
        s.tolerance = j.at("tolerance").get<double>();
        return s;
    }
};

/// Smoothed raw data of a scene, and optionally its backprojected image.
struct SimulatedScene {
    RawSarData raw;
    std::optional<BackprojectedImage> image;
};

inline SimulatedScene simulate_scene(const std::vector<ShapeSpec>& shapes, double height, const SimulationSetup& setup,
                                     const FastTimeAxis& axis, bool with_image) {
    const auto map = render(setup.grid, shapes);
    SimulatedScene out{smooth(simulate(map, setup.track(height), axis)), std::nullopt};
    if (with_image) out.image = backproject(out.raw, setup.grid, setup.tolerance);
    return out;
}

/// Rebuilds a simulated sample's input from its provenance.
inline Matrix<float> regenerate_input(const Provenance& p, const SimulationSetup& setup) {
    const auto axis = setup.axis(p.height);
    const auto scene = simulate_scene(p.shapes, p.height, setup, axis, p.mode == InputMode::backprojected);
    return p.mode == InputMode::raw ? scene.raw.values.cast<float>() : scene.image->values.cast<float>();
}

using SceneGenerator = std::function<std::vector<ShapeSpec>(std::size_t label, Rng& rng)>;

struct GenerationSpec {
    Task task = Task::custom;
    std::size_t classes = 0;
    std::size_t n_per_class = 0;
    double height = 0.0;
    std::uint64_t seed = 0;
    std::vector<InputMode> modes{InputMode::raw};
    SceneGenerator scene;
    nlohmann::json params = nlohmann::json::object();
};

inline std::uint64_t sample_seed(std::uint64_t seed, Task task, std::size_t index) {
    return derive_seed(seed, static_cast<std::uint64_t>(task), index);
}

/// Generates one dataset per requested mode. Sample s (class-major order) draws its scene
/// from its own seed, so every mode sees identical scenes.
inline std::vector<LabeledDataset> generate(const GenerationSpec& spec, const SimulationSetup& setup) {
    require(spec.classes >= 1, "generate: need at least one class");
    require(spec.n_per_class >= 1, "generate: n_per_class must be at least 1");
    require(spec.height >= 0.0, "generate: height must be nonnegative");
    require(!spec.modes.empty(), "generate: no input mode requested");
    const auto axis = setup.axis(spec.height);
    const bool need_image = std::find(spec.modes.begin(), spec.modes.end(), InputMode::backprojected) != spec.modes.end();
    const std::size_t total = spec.classes * spec.n_per_class;

    std::vector<LabeledDataset> out(spec.modes.size());
    for (std::size_t m = 0; m < spec.modes.size(); ++m) {
        auto& ds = out[m];
        ds.task = spec.task;
        ds.class_count = spec.classes;
        ds.samples.resize(total);
        ds.meta = {{"task", to_string(spec.task)},
                   {"n_per_class", spec.n_per_class},
                   {"height", spec.height},
                   {"mode", to_string(spec.modes[m])},
                   {"seed", spec.seed},
                   {"params", spec.params},
                   {"setup", setup.to_json()},
                   {"time_axis", {{"t_min", axis.t_min}, {"t_max", axis.t_max}, {"n_t", axis.n_t}}}};
    }

    parallel_for(total, [&](std::size_t s) {
        const std::size_t label = s / spec.n_per_class + 1;
        const std::uint64_t seed = sample_seed(spec.seed, spec.task, s);
        Rng rng(seed);
        const auto shapes = spec.scene(label, rng);
        const auto scene = simulate_scene(shapes, spec.height, setup, axis, need_image);
        for (std::size_t m = 0; m < spec.modes.size(); ++m) {
            Sample& sample = out[m].samples[s];
            sample.label = label;
            sample.provenance = {spec.task, spec.height, seed, spec.modes[m], shapes, {}};
            sample.input = spec.modes[m] == InputMode::raw ? scene.raw.values.cast<float>()
                                                          : scene.image->values.cast<float>();
        }
    });

    for (auto& ds : out) split(ds, default_fractions, derive_seed(spec.seed, 0x5e1, static_cast<std::uint64_t>(spec.task)));
    return out;
}

// Shape task: circle r=2, square s=5.5, ellipse a=1.5 b=3, rhombus d=3 (labels 1..4),
// centres uniform in [3, 6]^2.

inline ShapeSpec shape_for_label(std::size_t label, Point2 center) {
    switch (label) {
        case 1: return circle(2.0, center);
        case 2: return square(5.5, center);
        case 3: return ellipse(1.5, 3.0, center);
        case 4: return rhombus(3.0, center);
    }
    fail(ErrorCode::invalid_argument, "shape label must be 1..4");
}

inline GenerationSpec shape_spec(std::size_t n_per_class, double height, std::uint64_t seed) {
    GenerationSpec spec;
    spec.task = Task::shape;
    spec.classes = 4;
    spec.n_per_class = n_per_class;
    spec.height = height;
    spec.seed = seed;
    spec.scene = [](std::size_t label, Rng& rng) {
        return std::vector<ShapeSpec>{shape_for_label(label, sample_center(3.0, 6.0, rng))};
    };
    spec.params = {{"center_range", {3.0, 6.0}}};
    return spec;
}

inline LabeledDataset gen_shape_dataset(std::size_t n_per_class, double height, InputMode mode, std::uint64_t seed,
                                        const SimulationSetup& setup = {}) {
    auto spec = shape_spec(n_per_class, height, seed);
    spec.modes = {mode};
    return std::move(generate(spec, setup).front());
}

struct PairedDatasets {
    LabeledDataset raw;
    LabeledDataset backprojected;
};

/// Raw and backprojected shape datasets over the same scenes.
inline PairedDatasets gen_shape_datasets_paired(std::size_t n_per_class, double height, std::uint64_t seed,
                                                const SimulationSetup& setup = {}) {
    auto spec = shape_spec(n_per_class, height, seed);
    spec.modes = {InputMode::raw, InputMode::backprojected};
    auto both = generate(spec, setup);
    return {std::move(both[0]), std::move(both[1])};
}

// Multi-scatterer task: one bump (label 1) or two bumps (label 2) of radius r; the first
// centre is uniform in [0, 5]^2, the second in [-4, -1]^2. The second centre is redrawn
// until the disks are disjoint, unless the two boxes are too close for any disjoint pair.
inline bool multiscatterer_disjoint(double radius) { return 2.0 * radius < std::hypot(9.0, 9.0); }

inline LabeledDataset gen_multiscatterer_dataset(double radius, std::size_t n_per_class, std::uint64_t seed,
                                                 const SimulationSetup& setup = {}, double height = 5.0) {
    require(radius > 0.0, "multi-scatterer: radius must be positive");
    GenerationSpec spec;
    spec.task = Task::multiscatterer;
    spec.classes = 2;
    spec.n_per_class = n_per_class;
    spec.height = height;
    spec.seed = seed;
    spec.scene = [radius](std::size_t label, Rng& rng) {
        const Point2 first = sample_center(0.0, 5.0, rng);
        std::vector<ShapeSpec> shapes{circle(radius, first)};
        if (label == 2) {
            Point2 second = sample_center(-4.0, -1.0, rng);
            for (std::size_t attempt = 1; multiscatterer_disjoint(radius) &&
                                          std::hypot(first.x - second.x, first.y - second.y) <= 2.0 * radius;
                 ++attempt) {
                if (attempt >= 100000) fail(ErrorCode::state, "multi-scatterer: could not place disjoint bumps");
                second = sample_center(-4.0, -1.0, rng);
            }
            shapes.push_back(circle(radius, second));
        }
        return shapes;
    };
    spec.params = {{"radius", radius}, {"first_center_range", {0.0, 5.0}}, {"second_center_range", {-4.0, -1.0}},
                   {"disjoint", multiscatterer_disjoint(radius)}};
    return std::move(generate(spec, setup).front());
}

inline constexpr std::array<double, 4> radius_classes{1.0, 2.0, 5.0, 10.0};

// Radius task: a single circular bump with r in {1, 2, 5, 10} (labels 1..4), centre
// uniform in [3, 6]^2.
inline LabeledDataset gen_radius_dataset(std::size_t n_per_class = 1250, std::uint64_t seed = 0,
                                         const SimulationSetup& setup = {}, double height = 0.0) {
    GenerationSpec spec;
    spec.task = Task::radius;
    spec.classes = 4;
    spec.n_per_class = n_per_class;
    spec.height = height;
    spec.seed = seed;
    spec.scene = [](std::size_t label, Rng& rng) {
        return std::vector<ShapeSpec>{circle(radius_classes[label - 1], sample_center(3.0, 6.0, rng))};
    };
    spec.params = {{"radii", radius_classes}, {"center_range", {3.0, 6.0}}};
    return std::move(generate(spec, setup).front());
}

/// Centres of `count` disjoint disks of radius r lying inside the grid, by rejection.
inline std::vector<Point2> sample_disjoint_centers(std::size_t count, double r, const RoiGrid& grid, Rng& rng,
                                                   std::size_t max_attempts = 1000) {
    const double lo = grid.z_min + r;
    const double hi = grid.z_max - r;
    require(lo <= hi, "count task: bump radius too large for the grid");
    std::vector<Point2> centers;
    for (std::size_t b = 0; b < count; ++b) {
        std::size_t attempts = 0;
        for (;;) {
            const Point2 c = sample_center(lo, hi, rng);
            const bool clear = std::all_of(centers.begin(), centers.end(), [&](const Point2& o) {
                return std::hypot(c.x - o.x, c.y - o.y) > 2.0 * r;
            });
            if (clear) {
                centers.push_back(c);
                break;
            }
            if (++attempts >= max_attempts)
                fail(ErrorCode::state, "count task: could not place disjoint bumps (grid too crowded)");
        }
    }
    return centers;
}

// Count task: 1, 2 or 3 disjoint circular bumps of radius r (labels 1..3).
inline LabeledDataset gen_count_dataset(std::size_t n_total = 6000, std::uint64_t seed = 0,
                                        const SimulationSetup& setup = {}, double height = 0.0, double radius = 2.0) {
    require(n_total % 3 == 0 && n_total > 0, "count task: total sample count must be a positive multiple of 3");
    GenerationSpec spec;
    spec.task = Task::count;
    spec.classes = 3;
    spec.n_per_class = n_total / 3;
    spec.height = height;
    spec.seed = seed;
    const RoiGrid grid = setup.grid;
    spec.scene = [radius, grid](std::size_t label, Rng& rng) {
        std::vector<ShapeSpec> shapes;
        for (const Point2& c : sample_disjoint_centers(label, radius, grid, rng)) shapes.push_back(circle(radius, c));
        return shapes;
    };
    spec.params = {{"radius", radius}, {"n_total", n_total}};
    return std::move(generate(spec, setup).front());
}

// Ice imagery: root/<label>/ holds images of class label (1..8), as P5 graymaps or SARD
// image containers.

inline constexpr std::size_t ice_classes = 8;

inline std::vector<std::filesystem::path> ice_class_files(const std::filesystem::path& root, std::size_t label) {
    const auto dir = root / std::to_string(label);
    if (!std::filesystem::is_directory(dir)) fail(ErrorCode::io, "ice dataset: missing class directory " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = entry.path().extension();
        if (ext == ".pgm" || ext == ".sard") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

/// Images available per class, so callers can check balance before subsampling.
inline std::vector<std::size_t> ice_class_counts(const std::filesystem::path& root) {
    std::vector<std::size_t> counts;
    for (std::size_t label = 1; label <= ice_classes; ++label) counts.push_back(ice_class_files(root, label).size());
    return counts;
}

inline Matrix<float> load_image(const std::filesystem::path& path) {
    if (path.extension() == ".sard") {
        try {
            return sard::decode_image(sard::read_file(path));
        } catch (const Error& e) {
            fail(ErrorCode::format, path.string() + ": " + e.what());
        }
    }
    return pgm::read(path);
}

inline LabeledDataset load_ice_dataset(const std::filesystem::path& root, std::size_t n_per_class, std::uint64_t seed,
                                       std::size_t image_size = 256) {
    require(n_per_class >= 1, "ice dataset: n_per_class must be at least 1");
    if (!std::filesystem::is_directory(root))
        fail(ErrorCode::io, "ice dataset: directory " + root.string() +
                                " not found; obtain the labelled Sentinel-1 ice imagery and lay it out as <root>/<label>/*.pgm");
    LabeledDataset ds;
    ds.task = Task::ice;
    ds.class_count = ice_classes;
    for (std::size_t label = 1; label <= ice_classes; ++label) {
        auto files = ice_class_files(root, label);
        if (files.size() < n_per_class)
            fail(ErrorCode::invalid_argument, "ice dataset: class directory " + (root / std::to_string(label)).string() +
                                                  " holds " + std::to_string(files.size()) + " images, " +
                                                  std::to_string(n_per_class) + " requested");
        Rng rng(derive_seed(seed, 0x1ce, label));
        shuffle(files, rng);
        files.resize(n_per_class);
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            Sample s;
            s.input = load_image(file);
            if (s.input.rows() != image_size || s.input.cols() != image_size)
                fail(ErrorCode::format, file.string() + ": expected " + std::to_string(image_size) + "x" +
                                            std::to_string(image_size) + " pixels");
            for (float v : s.input.values())
                if (!std::isfinite(v)) fail(ErrorCode::format, file.string() + ": non-finite pixel");
            s.label = label;
            s.provenance.task = Task::ice;
            s.provenance.source = std::filesystem::relative(file, root).generic_string();
            ds.samples.push_back(std::move(s));
        }
    }
    ds.meta = {{"task", "ice"}, {"n_per_class", n_per_class}, {"seed", seed}, {"image_size", image_size}};
    split(ds, default_fractions, derive_seed(seed, 0x5e1, static_cast<std::uint64_t>(Task::ice)));
    return ds;
}

/// Writes every sample as root/<label>/<index>.pgm (16-bit).
inline void write_image_directory(const std::filesystem::path& root, const LabeledDataset& ds) {
    for (std::size_t label = 1; label <= ds.class_count; ++label) std::filesystem::create_directories(root / std::to_string(label));
    for (std::size_t i = 0; i < ds.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "%06zu.pgm", i);
        pgm::write(root / std::to_string(ds.samples[i].label) / name, ds.samples[i].input);
    }
}

/// Procedural texture of one of eight visually distinct families, with random phase and
/// additive noise; a stand-in for labelled ice imagery.
inline Matrix<float> synthetic_texture(std::size_t label, std::size_t size, Rng& rng) {
    require(label >= 1 && label <= ice_classes, "synthetic texture: label must be 1..8");
    const double phase = uniform(rng, 0.0, two_pi);
    const double cx = uniform(rng, 0.25, 0.75) * static_cast<double>(size);
    const double cy = uniform(rng, 0.25, 0.75) * static_cast<double>(size);
    std::vector<Point2> blobs;
    for (int b = 0; b < 12; ++b)
        blobs.push_back({uniform(rng, 0.0, static_cast<double>(size)), uniform(rng, 0.0, static_cast<double>(size))});
    Matrix<float> m(size, size);
    for (std::size_t i = 0; i < size; ++i) {
        for (std::size_t j = 0; j < size; ++j) {
            const double x = static_cast<double>(i);
            const double y = static_cast<double>(j);
            double v = 0.0;
            switch (label) {
                case 1: v = 0.05; break;
                case 2: v = 0.5 + 0.4 * std::sin(two_pi * x / 16.0 + phase); break;
                case 3: v = 0.5 + 0.4 * std::sin(two_pi * y / 16.0 + phase); break;
                case 4: v = 0.5 + 0.4 * std::sin(two_pi * (x + y) / 24.0 + phase); break;
                case 5: {
                    const double s = std::sin(two_pi * x / 32.0 + phase) * std::sin(two_pi * y / 32.0 + phase);
                    v = s > 0 ? 0.85 : 0.15;
                    break;
                }
                case 6: {
                    v = 0.1;
                    for (const Point2& b : blobs) {
                        const double d2 = (x - b.x) * (x - b.x) + (y - b.y) * (y - b.y);
                        v += 0.8 * std::exp(-d2 / (2.0 * 64.0));
                    }
                    break;
                }
                case 7: v = 0.5; break;
                case 8: v = 0.5 + 0.4 * std::sin(std::hypot(x - cx, y - cy) / 4.0 + phase); break;
            }
            const double noise_amp = label == 7 ? 0.3 : 0.05;
            v += uniform(rng, -noise_amp, noise_amp);
            m(i, j) = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
    }
    return m;
}

inline LabeledDataset synthetic_ice_dataset(std::size_t n_per_class, std::size_t size, std::uint64_t seed) {
    LabeledDataset ds;
    ds.task = Task::ice;
    ds.class_count = ice_classes;
    ds.samples.resize(ice_classes * n_per_class);
    parallel_for(ds.samples.size(), [&](std::size_t s) {
        Rng rng(sample_seed(seed, Task::ice, s));
        ds.samples[s].label = s / n_per_class + 1;
        ds.samples[s].input = synthetic_texture(ds.samples[s].label, size, rng);
        ds.samples[s].provenance.task = Task::ice;
        ds.samples[s].provenance.seed = sample_seed(seed, Task::ice, s);
        ds.samples[s].provenance.source = "synthetic";
    });
    ds.meta = {{"task", "ice"}, {"synthetic", true}, {"n_per_class", n_per_class}, {"seed", seed}, {"image_size", size}};
    split(ds, default_fractions, derive_seed(seed, 0x5e1, static_cast<std::uint64_t>(Task::ice)));
    return ds;
}

}  // namespace sarcnn
