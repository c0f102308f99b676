// shiftlab command line: biased sampling, model fitting, evaluation,
// benchmark runs and probability grids.

#include "shiftlab/dataset.hpp"
#include "shiftlab/error.hpp"
#include "shiftlab/experiment.hpp"
#include "shiftlab/methods.hpp"
#include "shiftlab/metrics.hpp"
#include "shiftlab/sampling.hpp"
#include "shiftlab/serialization.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>

namespace {

using namespace shiftlab;

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct BiasArgs {
    std::string data;
    std::string label_col = "label";
    int split_feature = 0;
    int n_train = 100;
    int n_test = 100;
    std::uint64_t seed = 0;
    std::vector<double> a_interval{1.0, 5.0};
    std::vector<double> b_interval{1.0, 5.0};
    std::string out_prefix;
};

struct FitArgs {
    std::string train;
    std::string test_inputs;
    std::string label_col = "label";
    std::string method;
    std::string views;
    std::string lambda = "auto";
    std::uint64_t seed = 0;
    double clip = 100.0;
    double kl_threshold = 0.1;
    bool normalize = false;
    std::string out;
};

struct EvalArgs {
    std::string model;
    std::string data;
    std::string label_col = "label";
    std::string predictions;
};

struct BenchArgs {
    std::string config;
    int threads = 1;
    std::string out;
    std::string table;
};

struct GridArgs {
    std::string model;
    double min = 0.0;
    double max = 1.0;
    int resolution = 50;
    std::string out;
};

Interval to_interval(const std::vector<double> &v) {
    return {v.at(0), v.at(1)};
}

Dataset apply_normalization(const Dataset &data, const std::optional<ColumnStats> &stats) {
    if (!stats) {
        return data;
    }
    if (stats->min.size() != data.dim()) {
        throw DataError("data has " + std::to_string(data.dim()) + " features, model normalization expects " +
                        std::to_string(stats->min.size()));
    }
    return normalize_unit_interval(data, stats).first;
}

int run_bias_sample(const BiasArgs &a) {
    const Dataset source = load_csv(a.data, a.label_col);
    BiasConfig cfg;
    cfg.split_feature = a.split_feature;
    cfg.n_train = a.n_train;
    cfg.n_test = a.n_test;
    cfg.a_interval = to_interval(a.a_interval);
    cfg.b_interval = to_interval(a.b_interval);
    cfg.seed = RandomSeed{a.seed};
    const BiasedSplit split = biased_sample(source, cfg);
    save_csv(split.train, a.out_prefix + "_train.csv", a.label_col);
    save_csv(split.test, a.out_prefix + "_test.csv", a.label_col);
    std::cout << "train " << split.train.size() << " rows -> " << a.out_prefix << "_train.csv\n"
              << "test " << split.test.size() << " rows -> " << a.out_prefix << "_test.csv\n";
    return kOk;
}

int run_fit(const FitArgs &a) {
    const Method method = parse_method(a.method);
    Dataset train = load_csv(a.train, a.label_col);
    const bool test_labeled = csv_has_column(a.test_inputs, a.label_col);
    Dataset test = load_csv(a.test_inputs, test_labeled ? std::optional<std::string>(a.label_col) : std::nullopt);
    if (test.dim() != train.dim()) {
        throw DataError("test inputs have " + std::to_string(test.dim()) + " features, training data has " +
                        std::to_string(train.dim()));
    }
    std::optional<ColumnStats> stats;
    if (a.normalize) {
        Eigen::MatrixXd pooled(static_cast<Eigen::Index>(train.size() + test.size()), train.dim());
        pooled << train.features(), test.features();
        stats = column_stats(pooled);
        train = normalize_unit_interval(train, stats).first;
        test = normalize_unit_interval(test.without_labels(), stats).first;
    }

    ShiftOptions shift_options;
    shift_options.ratio.clip = a.clip;
    shift_options.kl_threshold = a.kl_threshold;
    if (!a.views.empty()) {
        const nlohmann::json vj = read_json_file(a.views);
        const ViewPartition partition = view_partition_from_json(vj, train.dim());
        shift_options.views = partition.views();
        if (vj.contains("generalized")) {
            shift_options.generalized = partition.generalized();
        }
    }
    const ShiftContext shift = prepare_shift(train.features(), test.features(), shift_options);

    double lambda = 0.0;
    if (a.lambda == "auto") {
        lambda = select_method_lambda(method, train, shift, default_lambda_grid(), RandomSeed{a.seed}).lambda;
    } else {
        const auto res = std::from_chars(a.lambda.data(), a.lambda.data() + a.lambda.size(), lambda);
        if (res.ec != std::errc{} || res.ptr != a.lambda.data() + a.lambda.size() || !(lambda >= 0.0)) {
            throw ConfigError("--lambda must be 'auto' or a non-negative number, got '" + a.lambda + "'");
        }
    }
    const Model model = fit_method(method, train, lambda, shift);
    save_model(ModelFile{model, stats}, a.out);
    std::cout << "method " << to_string(method) << "\nlambda " << lambda << "\nmodel -> " << a.out << '\n';
    return kOk;
}

int run_eval(const EvalArgs &a) {
    const ModelFile file = load_model(a.model);
    const Dataset data = apply_normalization(load_csv(a.data, a.label_col), file.normalization);
    if (data.dim() != file.model.input_dim()) {
        throw DataError("data has " + std::to_string(data.dim()) + " features, model expects " +
                        std::to_string(file.model.input_dim()));
    }
    for (const int y : data.labels()) {
        if (y >= file.model.class_count()) {
            throw DataError("label " + std::to_string(y) + " is outside the model's " +
                            std::to_string(file.model.class_count()) + " classes");
        }
    }
    std::printf("logloss %.6f\naccuracy %.6f\n", logloss(file.model, data), accuracy(file.model, data));
    if (!a.predictions.empty()) {
        std::ofstream out(a.predictions);
        if (!out) {
            throw DataError("cannot open " + a.predictions + " for writing");
        }
        out.precision(std::numeric_limits<double>::max_digits10);
        const Dataset raw = load_csv(a.data, a.label_col);
        for (int j = 0; j < raw.dim(); ++j) {
            out << (j < static_cast<int>(raw.feature_names().size()) ? raw.feature_names()[static_cast<std::size_t>(j)]
                                                                     : "x" + std::to_string(j))
                << ',';
        }
        for (int k = 0; k < file.model.class_count(); ++k) {
            out << "p_" << k << (k + 1 < file.model.class_count() ? "," : "\n");
        }
        for (std::size_t i = 0; i < data.size(); ++i) {
            const Eigen::VectorXd p = file.model.predict_proba(data.row(i));
            for (int j = 0; j < raw.dim(); ++j) {
                out << raw.features()(static_cast<Eigen::Index>(i), j) << ',';
            }
            for (Eigen::Index k = 0; k < p.size(); ++k) {
                out << p(k) << (k + 1 < p.size() ? "," : "\n");
            }
        }
    }
    return kOk;
}

int run_bench(const BenchArgs &a) {
    const ExperimentConfig cfg = load_config(a.config);
    const ExperimentResult result = run_experiment(cfg, a.threads);
    const std::string table = format_table(result);
    std::cout << table;
    if (!a.out.empty()) {
        write_json_file(to_json(result), a.out);
    }
    if (!a.table.empty()) {
        std::ofstream(a.table) << table;
    }
    return kOk;
}

int run_grid(const GridArgs &a) {
    const ModelFile file = load_model(a.model);
    const auto proba = [&file](const Eigen::VectorXd &x) -> Eigen::VectorXd {
        if (!file.normalization) {
            return file.model.predict_proba(x);
        }
        const Dataset one(x.transpose(), std::nullopt, 2);
        return file.model.predict_proba(normalize_unit_interval(one, file.normalization).first.row(0));
    };
    GridBounds bounds;
    bounds.min.setConstant(a.min);
    bounds.max.setConstant(a.max);
    write_grid_csv(emit_grid(proba, file.model.input_dim(), bounds, a.resolution), a.out);
    std::cout << a.resolution * a.resolution << " grid rows -> " << a.out << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Covariate-shift-aware classifiers and benchmark harness"};
    app.require_subcommand(1);

    BiasArgs bias;
    auto *bias_cmd = app.add_subcommand("bias-sample", "Draw a biased train/test split from a labeled CSV");
    bias_cmd->add_option("--data", bias.data, "Source CSV")->required()->check(CLI::ExistingFile);
    bias_cmd->add_option("--label-col", bias.label_col, "Label column name");
    bias_cmd->add_option("--split-feature", bias.split_feature, "Feature index for the median split")->required();
    bias_cmd->add_option("--n-train", bias.n_train, "Training sample size")->required();
    bias_cmd->add_option("--n-test", bias.n_test, "Test sample size")->required();
    bias_cmd->add_option("--seed", bias.seed, "Random seed")->required();
    bias_cmd->add_option("--a-interval", bias.a_interval, "Interval for a")->expected(2);
    bias_cmd->add_option("--b-interval", bias.b_interval, "Interval for b")->expected(2);
    bias_cmd->add_option("--out-prefix", bias.out_prefix, "Writes PREFIX_train.csv and PREFIX_test.csv")->required();

    FitArgs fit;
    auto *fit_cmd = app.add_subcommand("fit", "Train one method and save it as JSON");
    fit_cmd->add_option("--train", fit.train, "Labeled training CSV")->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("--test-inputs", fit.test_inputs, "Test CSV (labels ignored)")
        ->required()
        ->check(CLI::ExistingFile);
    fit_cmd->add_option("--label-col", fit.label_col, "Label column name");
    fit_cmd->add_option("--method", fit.method, "lr|iw-lr|svm|iw-svm|robust-logloss|robust-multiview|robust-01|adv-01")
        ->required();
    fit_cmd->add_option("--views", fit.views, "View partition JSON")->check(CLI::ExistingFile);
    fit_cmd->add_option("--lambda", fit.lambda, "'auto' for CV/IWCV selection, or a value");
    fit_cmd->add_option("--seed", fit.seed, "Fold seed for lambda selection");
    fit_cmd->add_option("--clip", fit.clip, "Density ratio clip bound rho");
    fit_cmd->add_option("--kl-threshold", fit.kl_threshold, "View generalization threshold");
    fit_cmd->add_flag("--normalize", fit.normalize, "Map inputs to [0,1] using pooled train/test ranges");
    fit_cmd->add_option("--out", fit.out, "Output model JSON")->required();

    EvalArgs eval;
    auto *eval_cmd = app.add_subcommand("eval", "Print logloss and accuracy of a saved model");
    eval_cmd->add_option("--model", eval.model, "Model JSON")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--data", eval.data, "Labeled CSV")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--label-col", eval.label_col, "Label column name");
    eval_cmd->add_option("--predictions", eval.predictions, "Also write x..., p_0..p_{K-1} rows to this CSV");

    BenchArgs bench;
    auto *bench_cmd = app.add_subcommand("bench", "Run a replicated benchmark from a JSON config");
    bench_cmd->add_option("--config", bench.config, "Config JSON")->required()->check(CLI::ExistingFile);
    bench_cmd->add_option("--threads", bench.threads, "Worker threads")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--out", bench.out, "Results JSON");
    bench_cmd->add_option("--table", bench.table, "Also write the text table here");

    GridArgs grid;
    auto *grid_cmd = app.add_subcommand("grid", "Evaluate P(class 1 | x) of a 2-input model on a lattice");
    grid_cmd->add_option("--model", grid.model, "Model JSON")->required()->check(CLI::ExistingFile);
    grid_cmd->add_option("--min", grid.min, "Lower bound for both axes");
    grid_cmd->add_option("--max", grid.max, "Upper bound for both axes");
    grid_cmd->add_option("--resolution", grid.resolution, "Points per axis");
    grid_cmd->add_option("--out", grid.out, "Output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*bias_cmd) {
            return run_bias_sample(bias);
        }
        if (*fit_cmd) {
            return run_fit(fit);
        }
        if (*eval_cmd) {
            return run_eval(eval);
        }
        if (*bench_cmd) {
            return run_bench(bench);
        }
        if (*grid_cmd) {
            return run_grid(grid);
        }
    } catch (const ConfigError &e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const DataError &e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const NumericError &e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kNumeric;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    }
    return kUsage;
}
