#include "shiftlab/experiment.hpp"

#include "shiftlab/error.hpp"
#include "shiftlab/metrics.hpp"
#include "shiftlab/pca.hpp"
#include "shiftlab/serialization.hpp"
#include "shiftlab/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iomanip>
#include <sstream>
#include <thread>

namespace shiftlab {

using nlohmann::json;

namespace {

Interval interval_from(const json &j, const char *name) {
    if (!j.is_array() || j.size() != 2) {
        throw ConfigError(std::string(name) + " must be a two-element array [lo, hi]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

json draw_json(const PortionDraw &d) {
    return {{"a", d.a}, {"b", d.b}, {"component", d.component}, {"mu", d.mu}, {"sigma", d.sigma}};
}

template <class E>
[[noreturn]] void rethrow_with_index(const E &e, int index) {
    throw E("replicate " + std::to_string(index) + ": " + e.what());
}

double mean_of(const std::vector<double> &v) {
    double s = 0.0;
    for (const double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double> &v) {
    if (v.size() < 2) {
        return 0.0;
    }
    const double m = mean_of(v);
    double ss = 0.0;
    for (const double x : v) {
        ss += (x - m) * (x - m);
    }
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/// Flags the best entry (by `better`) and every entry a paired t-test at
/// `alpha` cannot separate from it.
std::vector<bool> mark_best(const std::vector<std::vector<double>> &series, bool higher_is_better, double alpha) {
    std::vector<bool> flags(series.size(), false);
    if (series.empty()) {
        return flags;
    }
    std::size_t best = 0;
    for (std::size_t j = 1; j < series.size(); ++j) {
        const double a = mean_of(series[j]);
        const double b = mean_of(series[best]);
        if (higher_is_better ? a > b : a < b) {
            best = j;
        }
    }
    flags[best] = true;
    for (std::size_t j = 0; j < series.size(); ++j) {
        if (j != best && series[j].size() >= 2 && paired_t_test(series[j], series[best]).p >= alpha) {
            flags[j] = true;
        }
    }
    return flags;
}

}  // namespace

ExperimentConfig parse_config(const json &j, const std::filesystem::path &base_dir) {
    if (!j.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    try {
        ExperimentConfig cfg;
        if (!j.contains("dataset")) {
            throw ConfigError("config is missing \"dataset\"");
        }
        cfg.dataset = j.at("dataset").get<std::string>();
        if (cfg.dataset.is_relative() && !base_dir.empty()) {
            cfg.dataset = base_dir / cfg.dataset;
        }
        if (j.contains("label_col")) {
            if (j.at("label_col").is_null()) {
                throw ConfigError("label_col must name a column");
            }
            cfg.label_col = j.at("label_col").get<std::string>();
        }
        if (!j.contains("methods") || !j.at("methods").is_array() || j.at("methods").empty()) {
            throw ConfigError("config needs a nonempty \"methods\" array");
        }
        for (const auto &m : j.at("methods")) {
            const Method method = parse_method(m.get<std::string>());
            if (std::find(cfg.methods.begin(), cfg.methods.end(), method) != cfg.methods.end()) {
                throw ConfigError("method '" + to_string(method) + "' listed twice");
            }
            cfg.methods.push_back(method);
        }
        const bool language = j.value("preset", std::string{}) == "language";
        if (j.contains("preset") && !language) {
            throw ConfigError("unknown preset '" + j.at("preset").get<std::string>() + "'");
        }
        if (language) {
            cfg.pca_dims_per_view = 100;
            cfg.bias.n_train = 500;
            cfg.bias.n_test = 500;
        }
        cfg.replicates = j.value("replicates", cfg.replicates);
        if (cfg.replicates < 1) {
            throw ConfigError("replicates must be at least 1");
        }
        if (j.contains("bias")) {
            const json &b = j.at("bias");
            cfg.bias.split_feature = b.value("split_feature", cfg.bias.split_feature);
            if (b.contains("a_interval")) {
                cfg.bias.a_interval = interval_from(b.at("a_interval"), "a_interval");
            }
            if (b.contains("b_interval")) {
                cfg.bias.b_interval = interval_from(b.at("b_interval"), "b_interval");
            }
            cfg.bias.n_train = b.value("n_train", cfg.bias.n_train);
            cfg.bias.n_test = b.value("n_test", cfg.bias.n_test);
        }
        cfg.bias.validate();
        if (j.contains("lambda_grid")) {
            cfg.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
            if (cfg.lambda_grid.empty()) {
                throw ConfigError("lambda_grid is empty");
            }
        }
        cfg.kl_threshold = j.value("kl_threshold", cfg.kl_threshold);
        cfg.clip_rho = j.value("clip_rho", cfg.clip_rho);
        if (!(cfg.clip_rho >= 1.0)) {
            throw ConfigError("clip_rho must be at least 1");
        }
        cfg.master_seed.value = j.value("master_seed", std::uint64_t{0});
        if (j.contains("views")) {
            cfg.views = j.at("views").get<std::vector<std::vector<int>>>();
        }
        if (j.contains("pca_dims_per_view")) {
            cfg.pca_dims_per_view = j.at("pca_dims_per_view").get<int>();
            if (*cfg.pca_dims_per_view < 1) {
                throw ConfigError("pca_dims_per_view must be at least 1");
            }
        }
        cfg.fit.subgradient.iterations = j.value("subgradient_iterations", cfg.fit.subgradient.iterations);
        cfg.fit.descent.max_iterations = j.value("max_iterations", cfg.fit.descent.max_iterations);
        if (cfg.fit.subgradient.iterations < 1 || cfg.fit.descent.max_iterations < 1) {
            throw ConfigError("iteration counts must be positive");
        }
        return cfg;
    } catch (const json::exception &e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
}

ExperimentConfig load_config(const std::filesystem::path &path) {
    json j;
    try {
        j = read_json_file(path);
    } catch (const DataError &e) {
        throw ConfigError(e.what());
    }
    return parse_config(j, path.parent_path());
}

json to_json(const ExperimentConfig &cfg) {
    json methods = json::array();
    for (const Method m : cfg.methods) {
        methods.push_back(to_string(m));
    }
    json out{{"dataset", cfg.dataset.filename().string()},
             {"label_col", cfg.label_col ? json(*cfg.label_col) : json(nullptr)},
             {"methods", methods},
             {"replicates", cfg.replicates},
             {"bias",
              {{"split_feature", cfg.bias.split_feature},
               {"a_interval", {cfg.bias.a_interval.lo, cfg.bias.a_interval.hi}},
               {"b_interval", {cfg.bias.b_interval.lo, cfg.bias.b_interval.hi}},
               {"n_train", cfg.bias.n_train},
               {"n_test", cfg.bias.n_test}}},
             {"lambda_grid", cfg.lambda_grid},
             {"kl_threshold", cfg.kl_threshold},
             {"clip_rho", cfg.clip_rho},
             {"master_seed", cfg.master_seed.value},
             {"subgradient_iterations", cfg.fit.subgradient.iterations},
             {"max_iterations", cfg.fit.descent.max_iterations},
             {"kl_density_convention", "discriminator posteriors normalized over pooled inputs"}};
    if (cfg.views) {
        out["views"] = *cfg.views;
    }
    if (cfg.pca_dims_per_view) {
        out["pca_dims_per_view"] = *cfg.pca_dims_per_view;
    }
    return out;
}

PreparedSource prepare_source(const Dataset &raw, const ExperimentConfig &cfg) {
    PreparedSource out;
    out.data = normalize_unit_interval(raw).first;
    out.views = cfg.views;
    if (!cfg.pca_dims_per_view) {
        return out;
    }
    const ViewPartition views =
        cfg.views ? ViewPartition(*cfg.views, {}, raw.dim()) : ViewPartition::per_feature(raw.dim());
    std::vector<Eigen::MatrixXd> blocks;
    Eigen::Index total = 0;
    for (int v = 0; v < views.view_count(); ++v) {
        const Eigen::MatrixXd cols = views.extract_columns(v, out.data.features());
        const PcaModel pca = fit_pca(cols, *cfg.pca_dims_per_view);
        blocks.push_back(pca.rank() > 0 ? pca.project(cols) : Eigen::MatrixXd::Zero(cols.rows(), 1));
        total += blocks.back().cols();
    }
    Eigen::MatrixXd reduced(out.data.features().rows(), total);
    std::vector<std::vector<int>> new_views;
    Eigen::Index at = 0;
    for (const auto &b : blocks) {
        reduced.middleCols(at, b.cols()) = b;
        std::vector<int> idx;
        for (Eigen::Index c = 0; c < b.cols(); ++c) {
            idx.push_back(static_cast<int>(at + c));
        }
        new_views.push_back(std::move(idx));
        at += b.cols();
    }
    const Dataset renamed(reduced, std::vector<int>(raw.labels().begin(), raw.labels().end()), raw.class_count());
    out.data = normalize_unit_interval(renamed).first;
    out.views = std::move(new_views);
    return out;
}

ReplicateResult run_replicate(const PreparedSource &source, const ExperimentConfig &cfg, int index) {
    ReplicateResult rep;
    rep.index = index;
    rep.seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(index));
    BiasConfig bias = cfg.bias;
    bias.seed = derive_seed(rep.seed, 0);
    const BiasedSplit split = biased_sample(source.data, bias);
    rep.train_draw = split.train_draw;
    rep.test_draw = split.test_draw;

    ShiftOptions shift_options;
    shift_options.ratio.clip = cfg.clip_rho;
    shift_options.kl_threshold = cfg.kl_threshold;
    shift_options.views = source.views;
    const ShiftContext shift = prepare_shift(split.train.features(), split.test.features(), shift_options);
    rep.view_divergence = shift.view_divergence;
    rep.generalized_views = shift.multiview->partition().generalized();

    const RandomSeed fold_seed = derive_seed(rep.seed, 1);
    for (const Method method : cfg.methods) {
        const LambdaSelection sel =
            select_method_lambda(method, split.train, shift, cfg.lambda_grid, fold_seed, cfg.fit);
        const Model model = fit_method(method, split.train, sel.lambda, shift, cfg.fit);
        MethodOutcome outcome;
        outcome.lambda = sel.lambda;
        outcome.accuracy = accuracy(model, split.test);
        if (is_probabilistic(method)) {
            outcome.logloss = logloss(model, split.test);
        }
        rep.outcomes[method] = outcome;
    }
    return rep;
}

ExperimentResult run_experiment(const ExperimentConfig &cfg, int threads) {
    const Dataset raw = load_csv(cfg.dataset, cfg.label_col);
    return run_experiment(cfg, raw, threads);
}

ExperimentResult run_experiment(const ExperimentConfig &cfg, const Dataset &raw_source, int threads) {
    if (!raw_source.labeled()) {
        throw DataError("experiment dataset must be labeled");
    }
    const PreparedSource source = prepare_source(raw_source, cfg);
    const auto n = static_cast<std::size_t>(cfg.replicates);
    std::vector<ReplicateResult> results(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t r = next++; r < n; r = next++) {
            const int idx = static_cast<int>(r);
            try {
                try {
                    results[r] = run_replicate(source, cfg, idx);
                } catch (const DataError &e) {
                    rethrow_with_index(e, idx);
                } catch (const NumericError &e) {
                    rethrow_with_index(e, idx);
                } catch (const ConfigError &e) {
                    rethrow_with_index(e, idx);
                }
            } catch (...) {
                errors[r] = std::current_exception();
            }
        }
    };
    const int workers = std::clamp(threads, 1, cfg.replicates);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) {
            pool.emplace_back(worker);
        }
        for (auto &t : pool) {
            t.join();
        }
    }
    for (const auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    ExperimentResult out;
    out.config = cfg;
    out.replicates = std::move(results);
    out.summary = summarize(cfg.methods, out.replicates);
    return out;
}

std::vector<MethodSummary> summarize(const std::vector<Method> &methods, const std::vector<ReplicateResult> &reps) {
    std::vector<MethodSummary> out;
    std::vector<std::vector<double>> acc;
    std::vector<std::vector<double>> loss;
    std::vector<std::size_t> loss_owner;
    for (const Method m : methods) {
        MethodSummary s;
        s.method = m;
        std::vector<double> a;
        std::vector<double> l;
        for (const auto &rep : reps) {
            const auto it = rep.outcomes.find(m);
            if (it == rep.outcomes.end()) {
                throw DataError("replicate " + std::to_string(rep.index) + " has no result for " + to_string(m));
            }
            a.push_back(it->second.accuracy);
            if (it->second.logloss) {
                l.push_back(*it->second.logloss);
            }
        }
        s.mean_accuracy = mean_of(a);
        s.sd_accuracy = sd_of(a);
        if (!l.empty()) {
            s.mean_logloss = mean_of(l);
            s.sd_logloss = sd_of(l);
            loss.push_back(std::move(l));
            loss_owner.push_back(out.size());
        }
        acc.push_back(std::move(a));
        out.push_back(s);
    }
    const auto acc_flags = mark_best(acc, true, 0.1);
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j].best_accuracy = acc_flags[j];
    }
    const auto loss_flags = mark_best(loss, false, 0.05);
    for (std::size_t j = 0; j < loss_owner.size(); ++j) {
        out[loss_owner[j]].best_logloss = loss_flags[j];
    }
    return out;
}

json to_json(const ExperimentResult &result) {
    json reps = json::array();
    for (const auto &rep : result.replicates) {
        json outcomes = json::object();
        for (const auto &[method, o] : rep.outcomes) {
            json entry{{"lambda", o.lambda}, {"accuracy", o.accuracy}};
            entry["logloss"] = o.logloss ? json(*o.logloss) : json(nullptr);
            outcomes[to_string(method)] = entry;
        }
        reps.push_back({{"index", rep.index},
                        {"seed", rep.seed.value},
                        {"methods", outcomes},
                        {"view_divergence", rep.view_divergence},
                        {"generalized_views", rep.generalized_views},
                        {"train_draw", draw_json(rep.train_draw)},
                        {"test_draw", draw_json(rep.test_draw)}});
    }
    json summary = json::array();
    for (const auto &s : result.summary) {
        summary.push_back({{"method", to_string(s.method)},
                           {"mean_accuracy", s.mean_accuracy},
                           {"sd_accuracy", s.sd_accuracy},
                           {"mean_logloss", s.mean_logloss ? json(*s.mean_logloss) : json(nullptr)},
                           {"sd_logloss", s.sd_logloss ? json(*s.sd_logloss) : json(nullptr)},
                           {"best_accuracy", s.best_accuracy},
                           {"best_logloss", s.best_logloss}});
    }
    return {{"config", to_json(result.config)}, {"replicates", reps}, {"summary", summary}};
}

std::string format_table(const ExperimentResult &result) {
    std::ostringstream out;
    const auto cell = [](double mean, double sd, bool star) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3f +- %.3f%s", mean, sd, star ? " *" : "  ");
        return std::string(buf);
    };
    std::size_t width = 6;
    for (const auto &s : result.summary) {
        width = std::max(width, to_string(s.method).size());
    }
    out << std::left << std::setw(static_cast<int>(width)) << "method" << "  " << std::setw(18) << "accuracy"
        << "  " << "logloss" << '\n';
    out << std::string(width + 2 + 18 + 2 + 17, '-') << '\n';
    for (const auto &s : result.summary) {
        out << std::left << std::setw(static_cast<int>(width)) << to_string(s.method) << "  " << std::setw(18)
            << cell(s.mean_accuracy, s.sd_accuracy, s.best_accuracy) << "  "
            << (s.mean_logloss ? cell(*s.mean_logloss, *s.sd_logloss, s.best_logloss) : std::string("-")) << '\n';
    }
    out << result.replicates.size() << " replicates; * = best or not distinguishable from best (paired t, accuracy "
        << "alpha 0.1, logloss alpha 0.05)\n";
    return out.str();
}

}  // namespace shiftlab
