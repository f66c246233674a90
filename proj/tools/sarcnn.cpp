// Command-line driver: dataset generation, training, evaluation and the experiment suite.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sarcnn/sarcnn.hpp"

namespace fs = std::filesystem;
using namespace sarcnn;

namespace {

struct CommonFlags {
    std::uint64_t seed = 0;
    bool fixed_times = false;
    bool full_scale = false;
    std::optional<std::size_t> n_per_class;
    std::optional<std::size_t> epochs;
    std::optional<double> lr;
    std::optional<std::size_t> batch_size;
    std::string out = "results";

    HarnessOptions options() const {
        HarnessOptions o;
        o.seed = seed;
        o.full_scale = full_scale;
        o.n_per_class = n_per_class;
        o.epochs = epochs;
        if (lr) o.train.learning_rate = *lr;
        if (batch_size) o.train.batch_size = *batch_size;
        if (fixed_times) o.setup.time_axis = TimeAxisPolicy::fixed;
        return o;
    }
};

void add_seed(CLI::App* cmd, CommonFlags& f) { cmd->add_option("--seed", f.seed, "Random seed"); }

void add_simulation(CLI::App* cmd, CommonFlags& f) {
    cmd->add_flag("--paper-times", f.fixed_times, "Use the fixed fast-time interval [5, 23]");
}

void add_training(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--epochs", f.epochs, "Training epochs");
    cmd->add_option("--lr", f.lr, "Adam learning rate");
    cmd->add_option("--batch-size", f.batch_size, "Mini-batch size");
}

void add_experiment(CLI::App* cmd, CommonFlags& f) {
    add_seed(cmd, f);
    add_simulation(cmd, f);
    add_training(cmd, f);
    cmd->add_flag("--paper-scale", f.full_scale, "Full sample counts and epochs instead of the desk-scale defaults");
    cmd->add_option("--n-per-class", f.n_per_class, "Samples per class");
    cmd->add_option("--out", f.out, "Output directory for reports");
}

void print_counts(const LabeledDataset& ds) {
    const auto counts = ds.class_counts();
    for (std::size_t c = 0; c < counts.size(); ++c) std::printf("class %zu: %zu\n", c + 1, counts[c]);
    std::printf("total: %zu (train %zu, validation %zu, test %zu)\n", ds.size(), ds.splits.train.size(),
                ds.splits.validation.size(), ds.splits.test.size());
}

void emit(const ExperimentReport& r, const fs::path& dir) {
    r.write(dir);
    std::printf("%s: accuracy %s%% (train %s%%)\n", r.id.c_str(), percent(r.accuracy).c_str(),
                percent(r.train_accuracy).c_str());
}

void write_table(const fs::path& path, const std::string& csv) {
    ExperimentReport::write_text(path, csv);
    std::fputs(csv.c_str(), stdout);
}

const std::vector<std::size_t>& split_of(const LabeledDataset& ds, const std::string& name) {
    if (name == "train") return ds.splits.train;
    if (name == "validation") return ds.splits.validation;
    if (name == "test") return ds.splits.test;
    fail(ErrorCode::invalid_argument, "unknown split '" + name + "'");
}

std::string one_line(std::string s) {
    for (char& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SAR simulation and CNN classification workbench"};
    app.require_subcommand(1);

    // gen-dataset
    CommonFlags gen;
    std::string task = "shape";
    std::string mode = "raw";
    std::optional<double> height;
    double radius = 2.0;
    std::string out_file;
    auto* gen_cmd = app.add_subcommand("gen-dataset", "Simulate a labelled dataset and write it as SARD");
    gen_cmd->add_option("--task", task, "shape | multiscatterer | radius | count | ice-synthetic");
    gen_cmd->add_option("--height", height, "Antenna height");
    gen_cmd->add_option("--mode", mode, "raw | backprojected");
    gen_cmd->add_option("--radius", radius, "Bump radius (multiscatterer, count)");
    gen_cmd->add_option("--n-per-class", gen.n_per_class, "Samples per class");
    gen_cmd->add_option("--out", out_file, "Output SARD file")->required();
    add_seed(gen_cmd, gen);
    add_simulation(gen_cmd, gen);

    // train
    CommonFlags tr;
    std::string data_file;
    std::string checkpoint_file;
    std::size_t filters = 1;
    std::size_t filter_size = 13;
    auto* train_cmd = app.add_subcommand("train", "Train a CNN on a SARD dataset");
    train_cmd->add_option("--data", data_file, "Dataset SARD file")->required();
    train_cmd->add_option("--checkpoint", checkpoint_file, "Output checkpoint file")->required();
    train_cmd->add_option("--out", tr.out, "Report directory");
    train_cmd->add_option("--filters", filters, "Convolution filters");
    train_cmd->add_option("--filter-size", filter_size, "Convolution filter width");
    add_seed(train_cmd, tr);
    add_training(train_cmd, tr);

    // eval
    std::string eval_split = "test";
    std::string eval_out = "results";
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
    eval_cmd->add_option("--checkpoint", checkpoint_file, "Checkpoint file")->required();
    eval_cmd->add_option("--data", data_file, "Dataset SARD file")->required();
    eval_cmd->add_option("--split", eval_split, "train | validation | test | all");
    eval_cmd->add_option("--out", eval_out, "Report directory");

    // experiments
    CommonFlags exp;
    std::vector<double> heights{0.0, 5.0, 10.0};
    std::vector<double> radii{2.0, 15.0};
    std::string ice_root;
    bool ice_synthetic = false;
    std::size_t ice_size = 256;
    auto* shape_cmd = app.add_subcommand("shape-comparison", "Raw versus backprojected shape classification");
    shape_cmd->add_option("--heights", heights, "Antenna heights")->delimiter(',');
    add_experiment(shape_cmd, exp);
    auto* ms_cmd = app.add_subcommand("multiscatterer", "One versus two scatterers across bump radii");
    ms_cmd->add_option("--radii", radii, "Bump radii")->delimiter(',');
    ms_cmd->add_option("--height", height, "Antenna height");
    add_experiment(ms_cmd, exp);
    auto* rc_cmd = app.add_subcommand("radius-count", "Bump radius and bump count classification");
    rc_cmd->add_option("--height", height, "Antenna height");
    add_experiment(rc_cmd, exp);
    auto* ice_cmd = app.add_subcommand("ice", "Ice-type classification from a labelled image directory");
    ice_cmd->add_option("--root", ice_root, "Directory with class folders 1..8");
    ice_cmd->add_flag("--synthetic", ice_synthetic, "Use the procedural texture stand-in instead of --root");
    ice_cmd->add_option("--image-size", ice_size, "Image width and height");
    add_experiment(ice_cmd, exp);

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e);
        } catch (const CLI::CallForAllHelp& e) {
            return app.exit(e);
        } catch (const CLI::ParseError& e) {
            fail(ErrorCode::invalid_argument, e.what());
        }

        if (*gen_cmd) {
            auto setup = gen.options().setup;
            const std::uint64_t seed = gen.seed;
            const auto input_mode = mode_from_string(mode);
            LabeledDataset ds;
            if (task == "shape") {
                ds = gen_shape_dataset(gen.n_per_class.value_or(1000), height.value_or(5.0), input_mode, seed, setup);
            } else if (task == "multiscatterer") {
                ds = gen_multiscatterer_dataset(radius, gen.n_per_class.value_or(2500), seed, setup, height.value_or(5.0));
            } else if (task == "radius") {
                ds = gen_radius_dataset(gen.n_per_class.value_or(1250), seed, setup, height.value_or(0.0));
            } else if (task == "count") {
                ds = gen_count_dataset(3 * gen.n_per_class.value_or(2000), seed, setup, height.value_or(0.0), radius);
            } else if (task == "ice-synthetic") {
                ds = synthetic_ice_dataset(gen.n_per_class.value_or(10), 256, seed);
            } else {
                fail(ErrorCode::invalid_argument, "unknown task '" + task + "'");
            }
            if (input_mode == InputMode::backprojected && task != "shape" && task != "ice-synthetic") {
                // Non-shape generators emit raw data; backproject the stored scenes on request.
                for (auto& s : ds.samples) {
                    s.provenance.mode = InputMode::backprojected;
                    s.input = regenerate_input(s.provenance, setup);
                }
                ds.meta["mode"] = "backprojected";
            }
            sard::write_dataset(out_file, ds);
            print_counts(ds);
            std::printf("wrote %s\n", out_file.c_str());
        } else if (*train_cmd) {
            const auto ds = sard::read_dataset(data_file);
            auto config = tr.options().training();
            config.max_epochs = tr.epochs.value_or(30);
            const auto hyper = hyper_for(ds, filters, filter_size);
            const std::string id = fs::path(data_file).stem().string() + "-train";
            auto trained = train_and_test<double>(id, ds, hyper, config);
            sard::write_checkpoint<double>(checkpoint_file, {trained.params, trained.report.config});
            emit(trained.report, tr.out);
            std::printf("wrote %s\n", checkpoint_file.c_str());
        } else if (*eval_cmd) {
            const auto ck = sard::read_checkpoint<double>(checkpoint_file);
            const auto ds = sard::read_dataset(data_file);
            require_compatible(ck.params.hyper, ds);
            std::vector<std::size_t> indices;
            if (eval_split == "all") {
                for (std::size_t i = 0; i < ds.size(); ++i) indices.push_back(i);
            } else {
                indices = split_of(ds, eval_split);
            }
            ExperimentReport r;
            r.id = fs::path(data_file).stem().string() + "-eval-" + eval_split;
            r.config = {{"checkpoint", checkpoint_file}, {"dataset", ds.meta}, {"split", eval_split}};
            r.confusion = cnn::evaluate(ck.params, to_tensors<double>(ds, indices));
            r.accuracy = r.confusion.accuracy();
            r.write(eval_out);
            std::fputs(r.confusion_csv().c_str(), stdout);
            std::printf("accuracy: %s%%\n", percent(r.accuracy).c_str());
        } else if (*shape_cmd) {
            const auto result = run_shape_comparison(heights, exp.options());
            for (const auto& r : result.reports) emit(r, exp.out);
            write_table(fs::path(exp.out) / "shape_comparison.csv", result.table_csv());
        } else if (*ms_cmd) {
            const auto result = run_multiscatterer_sweep(radii, exp.options(), height.value_or(5.0));
            for (const auto& r : result.reports) emit(r, exp.out);
            write_table(fs::path(exp.out) / "multiscatterer.csv", result.table_csv());
            if (result.perfect_band)
                std::printf("100%% band: [%g, %g]\n", result.perfect_band->first, result.perfect_band->second);
            else
                std::printf("100%% band: none\n");
        } else if (*rc_cmd) {
            const auto result = run_radius_and_count(exp.options(), height.value_or(0.0));
            emit(result.radius, exp.out);
            emit(result.count, exp.out);
        } else if (*ice_cmd) {
            const auto opt = exp.options();
            if (ice_synthetic) {
                const auto ds = synthetic_ice_dataset(opt.n_per_class.value_or(10), ice_size, opt.seed);
                emit(run_ice_on(ds, opt, "ice-synthetic"), exp.out);
            } else {
                if (ice_root.empty()) fail(ErrorCode::invalid_argument, "ice: pass --root <dir> or --synthetic");
                emit(run_ice(ice_root, opt, ice_size), exp.out);
            }
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s: %s\n", std::string(to_string(e.code())).c_str(), one_line(e.what()).c_str());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: internal: %s\n", one_line(e.what()).c_str());
        return 1;
    }
    return 0;
}
