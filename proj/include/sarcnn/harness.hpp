#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "sarcnn/cnn/trainer.hpp"
#include "sarcnn/dataset.hpp"
#include "sarcnn/datasets.hpp"
#include "sarcnn/sard.hpp"

namespace sarcnn {

inline std::string percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * fraction);
    return buf;
}

inline nlohmann::json to_json(const cnn::TrainConfig& c) {
    return {{"learning_rate", c.learning_rate}, {"adam_beta1", c.adam_beta1},     {"adam_beta2", c.adam_beta2},
            {"adam_epsilon", c.adam_epsilon},   {"batch_size", c.batch_size},     {"max_epochs", c.max_epochs},
            {"seed", c.seed},                   {"validation_every", c.validation_every},
            {"keep_best_validation", c.keep_best_validation}};
}

/// Outcome of one trained-and-tested model.
struct ExperimentReport {
    std::string id;
    nlohmann::json config = nlohmann::json::object();
    std::uint64_t seed = 0;
    std::vector<cnn::EpochMetrics> history;
    cnn::ConfusionMatrix confusion{1};
    double accuracy = 0.0;        // trace / total of `confusion`
    double train_accuracy = 0.0;  // inference-mode accuracy of the returned model on the training split
    double wall_seconds = 0.0;

    std::string history_csv() const {
        std::ostringstream os;
        os << "epoch,train_loss,train_accuracy,validation_accuracy\n";
        for (const auto& m : history) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "%zu,%.6f,%s,%s\n", m.epoch, m.train_loss, percent(m.train_accuracy).c_str(),
                          std::isnan(m.validation_accuracy) ? "" : percent(m.validation_accuracy).c_str());
            os << buf;
        }
        return os.str();
    }

    // Rows are actual classes, columns predicted classes.
    std::string confusion_csv() const {
        std::ostringstream os;
        os << "actual\\predicted";
        for (std::size_t j = 1; j <= confusion.classes(); ++j) os << ',' << j;
        os << '\n';
        for (std::size_t i = 1; i <= confusion.classes(); ++i) {
            os << i;
            for (std::size_t j = 1; j <= confusion.classes(); ++j) os << ',' << confusion.at(i, j);
            os << '\n';
        }
        return os.str();
    }

    std::string text() const {
        std::ostringstream os;
        os << "experiment: " << id << '\n'
           << "seed: " << seed << '\n'
           << "accuracy: " << percent(accuracy) << '\n'
           << "train_accuracy: " << percent(train_accuracy) << '\n'
           << "test_samples: " << confusion.total() << '\n';
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", wall_seconds);
        os << "wall_clock_seconds: " << buf << '\n'
           << "config: " << config.dump() << '\n'
           << "\n[epochs]\n"
           << history_csv() << "\n[confusion]\n"
           << confusion_csv();
        return os.str();
    }

    /// Writes <dir>/<id>.txt and <dir>/<id>_confusion.csv.
    void write(const std::filesystem::path& dir) const {
        std::filesystem::create_directories(dir);
        write_text(dir / (id + ".txt"), text());
        write_text(dir / (id + "_confusion.csv"), confusion_csv());
    }

    static void write_text(const std::filesystem::path& path, const std::string& s) {
        std::ofstream out(path, std::ios::binary);
        if (!out) fail(ErrorCode::io, "cannot write " + path.string());
        out << s;
        if (!out) fail(ErrorCode::io, "write failed: " + path.string());
    }
};

/// Network shape for a dataset: square inputs of the sample size and one output per class.
inline cnn::Hyper hyper_for(const LabeledDataset& ds, std::size_t filters = 1, std::size_t filter_size = 13) {
    require(!ds.samples.empty(), "dataset is empty");
    const auto& first = ds.samples.front().input;
    require(first.rows() == first.cols(), "inputs must be square");
    for (const auto& s : ds.samples)
        require(s.input.rows() == first.rows() && s.input.cols() == first.cols(), "inputs differ in size");
    cnn::Hyper h;
    h.input_size = first.rows();
    h.filter_size = filter_size;
    h.filters = filters;
    h.classes = ds.class_count;
    return h;
}

/// Checks that a model can consume a dataset.
inline void require_compatible(const cnn::Hyper& h, const LabeledDataset& ds) {
    if (h.classes != ds.class_count)
        fail(ErrorCode::invalid_argument, "checkpoint has " + std::to_string(h.classes) + " output classes, dataset has " +
                                              std::to_string(ds.class_count));
    for (const auto& s : ds.samples)
        if (s.input.rows() != h.input_size || s.input.cols() != h.input_size)
            fail(ErrorCode::invalid_argument, "checkpoint expects " + std::to_string(h.input_size) + "x" +
                                                  std::to_string(h.input_size) + " inputs");
}

template <typename T>
struct TrainedExperiment {
    ExperimentReport report;
    cnn::ModelParams<T> params;
};

/// Trains on the training split, selects on the validation split, tests on the test split.
template <typename T = double>
TrainedExperiment<T> train_and_test(const std::string& id, const LabeledDataset& ds, const cnn::Hyper& hyper,
                                    const cnn::TrainConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    require_compatible(hyper, ds);
    const auto train_set = to_tensors<T>(ds, ds.splits.train);
    const auto validation = to_tensors<T>(ds, ds.splits.validation);
    const auto test = to_tensors<T>(ds, ds.splits.test);
    auto result = cnn::train<T>(hyper, train_set, validation, config);

    TrainedExperiment<T> out;
    auto& r = out.report;
    r.id = id;
    r.seed = config.seed;
    r.config = {{"dataset", ds.meta},
                {"hyper", sard::to_json(hyper)},
                {"train", to_json(config)},
                {"precision", sizeof(T) == 4 ? "f32" : "f64"},
                {"split_sizes", {ds.splits.train.size(), ds.splits.validation.size(), ds.splits.test.size()}},
                {"best_epoch", result.best_epoch}};
    r.history = std::move(result.history);
    r.confusion = test.empty() ? cnn::ConfusionMatrix(hyper.classes) : cnn::evaluate(result.params, test, config.seed);
    r.accuracy = r.confusion.accuracy();
    r.train_accuracy = cnn::evaluate(result.params, train_set, config.seed).accuracy();
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.params = std::move(result.params);
    return out;
}

/// Harness scale and overrides shared by the experiment drivers.
struct HarnessOptions {
    std::uint64_t seed = 0;
    bool full_scale = false;
    std::optional<std::size_t> n_per_class;  // overrides the scale default
    std::optional<std::size_t> epochs;       // overrides the scale default
    cnn::TrainConfig train{};                // max_epochs and seed are set by the drivers
    SimulationSetup setup{};

    static constexpr std::size_t desk_samples = 200;
    static constexpr std::size_t desk_epochs = 15;

    std::size_t samples(std::size_t full_default) const {
        return n_per_class.value_or(full_scale ? full_default : desk_samples);
    }

    cnn::TrainConfig training(std::size_t full_epochs = 30) const {
        cnn::TrainConfig c = train;
        c.max_epochs = epochs.value_or(full_scale ? full_epochs : desk_epochs);
        c.seed = seed;
        return c;
    }
};

struct ShapeComparisonRow {
    double height = 0.0;
    double raw_accuracy = 0.0;
    double backprojected_accuracy = 0.0;
};

struct ShapeComparison {
    std::vector<ShapeComparisonRow> rows;
    std::vector<ExperimentReport> reports;

    std::string table_csv() const {
        std::ostringstream os;
        os << "height,raw_accuracy,backprojected_accuracy\n";
        for (const auto& r : rows)
            os << r.height << ',' << percent(r.raw_accuracy) << ',' << percent(r.backprojected_accuracy) << '\n';
        return os.str();
    }
};

inline std::string height_tag(double h) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", h);
    return buf;
}

/// Raw versus backprojected shape classification over paired scenes at each height.
inline ShapeComparison run_shape_comparison(const std::vector<double>& heights, const HarnessOptions& opt) {
    ShapeComparison out;
    const auto config = opt.training();
    for (double h : heights) {
        const auto paired = gen_shape_datasets_paired(opt.samples(1000), h, opt.seed, opt.setup);
        const auto hyper = hyper_for(paired.raw);
        auto raw = train_and_test("shape-h" + height_tag(h) + "-raw", paired.raw, hyper, config).report;
        auto bp = train_and_test("shape-h" + height_tag(h) + "-backprojected", paired.backprojected, hyper, config).report;
        out.rows.push_back({h, raw.accuracy, bp.accuracy});
        out.reports.push_back(std::move(raw));
        out.reports.push_back(std::move(bp));
    }
    return out;
}

struct MultiscattererSweep {
    std::vector<double> radii;
    std::vector<double> accuracies;
    std::vector<ExperimentReport> reports;
    std::optional<std::pair<double, double>> perfect_band;  // widest contiguous run at 100%

    std::string table_csv() const {
        std::ostringstream os;
        os << "radius,accuracy\n";
        for (std::size_t i = 0; i < radii.size(); ++i) os << radii[i] << ',' << percent(accuracies[i]) << '\n';
        return os.str();
    }
};

/// Widest contiguous run (in list order) of entries equal to 1; ties keep the first.
inline std::optional<std::pair<double, double>> perfect_band(const std::vector<double>& radii,
                                                             const std::vector<double>& accuracies) {
    std::optional<std::pair<double, double>> best;
    std::size_t best_len = 0;
    for (std::size_t i = 0; i < radii.size();) {
        if (accuracies[i] != 1.0) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < radii.size() && accuracies[j + 1] == 1.0) ++j;
        if (j - i + 1 > best_len) {
            best_len = j - i + 1;
            best = std::pair{radii[i], radii[j]};
        }
        i = j + 1;
    }
    return best;
}

inline MultiscattererSweep run_multiscatterer_sweep(const std::vector<double>& radii, const HarnessOptions& opt,
                                                    double height = 5.0) {
    require(!radii.empty(), "multi-scatterer sweep: no radii given");
    MultiscattererSweep out;
    const auto config = opt.training();
    for (double r : radii) {
        const auto ds = gen_multiscatterer_dataset(r, opt.samples(2500), opt.seed, opt.setup, height);
        auto report = train_and_test("multiscatterer-r" + height_tag(r), ds, hyper_for(ds), config).report;
        out.radii.push_back(r);
        out.accuracies.push_back(report.accuracy);
        out.reports.push_back(std::move(report));
    }
    out.perfect_band = perfect_band(out.radii, out.accuracies);
    return out;
}

struct RadiusCount {
    ExperimentReport radius;
    ExperimentReport count;
};

inline RadiusCount run_radius_and_count(const HarnessOptions& opt, double height = 0.0) {
    const auto config = opt.training();
    const auto radius_ds = gen_radius_dataset(opt.samples(1250), opt.seed, opt.setup, height);
    const auto count_ds = gen_count_dataset(3 * opt.samples(2000), opt.seed, opt.setup, height);
    return {train_and_test("radius", radius_ds, hyper_for(radius_ds), config).report,
            train_and_test("count", count_ds, hyper_for(count_ds), config).report};
}

inline constexpr std::size_t ice_filters = 16;
inline constexpr std::size_t ice_iterations = 100;

/// Ice-type classification with 16 filters, trained for 100 epochs in single precision.
inline ExperimentReport run_ice_on(const LabeledDataset& ds, const HarnessOptions& opt, const std::string& id = "ice") {
    auto config = opt.training(ice_iterations);
    if (!opt.epochs) config.max_epochs = ice_iterations;
    return train_and_test<float>(id, ds, hyper_for(ds, ice_filters), config).report;
}

inline ExperimentReport run_ice(const std::filesystem::path& root, const HarnessOptions& opt, std::size_t image_size = 256) {
    const auto ds = load_ice_dataset(root, opt.n_per_class.value_or(opt.full_scale ? 1170 : 50), opt.seed, image_size);
    return run_ice_on(ds, opt);
}

}  // namespace sarcnn
