#pragma once

#include "shiftlab/methods.hpp"
#include "shiftlab/random.hpp"
#include "shiftlab/sampling.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace shiftlab {

struct ExperimentConfig {
    std::filesystem::path dataset;
    std::optional<std::string> label_col = "label";
    std::vector<Method> methods;
    int replicates = 30;
    BiasConfig bias{};  ///< seed is replaced per replicate
    std::vector<double> lambda_grid = default_lambda_grid();
    double kl_threshold = 0.1;
    double clip_rho = 100.0;
    RandomSeed master_seed{};
    /// Views over the (possibly PCA-reduced) inputs; one per feature when absent.
    std::optional<std::vector<std::vector<int>>> views;
    /// Per-view PCA reduction applied to the normalized source before sampling.
    std::optional<int> pca_dims_per_view;
    FitOptions fit{};
};

/// Parses the bench config. Relative dataset paths resolve against `base_dir`.
/// The "language" preset sets pca_dims_per_view = 100 and 500/500 sampling
/// unless those keys are given explicitly.
ExperimentConfig parse_config(const nlohmann::json &j, const std::filesystem::path &base_dir = {});
ExperimentConfig load_config(const std::filesystem::path &path);
nlohmann::json to_json(const ExperimentConfig &cfg);

struct MethodOutcome {
    double lambda = 0.0;
    std::optional<double> logloss;  ///< probabilistic methods only
    double accuracy = 0.0;
};

struct ReplicateResult {
    int index = 0;
    RandomSeed seed{};
    std::map<Method, MethodOutcome> outcomes;
    std::vector<double> view_divergence;
    std::vector<int> generalized_views;
    PortionDraw train_draw;
    PortionDraw test_draw;
};

struct MethodSummary {
    Method method = Method::LR;
    double mean_accuracy = 0.0;
    double sd_accuracy = 0.0;
    std::optional<double> mean_logloss;
    std::optional<double> sd_logloss;
    bool best_accuracy = false;  ///< best or not distinguishable from best, paired t at 0.1
    bool best_logloss = false;   ///< best or not distinguishable from best, paired t at 0.05
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<ReplicateResult> replicates;  ///< ordered by index
    std::vector<MethodSummary> summary;       ///< in config method order
};

/// The normalized (and optionally PCA-reduced) source with the views that apply to it.
struct PreparedSource {
    Dataset data;
    std::optional<std::vector<std::vector<int>>> views;
};

/// Normalizes to [0,1]; with pca_dims_per_view, replaces each view by its
/// leading principal scores, renormalized, and the views by contiguous blocks.
/// bias.split_feature then indexes the reduced columns.
PreparedSource prepare_source(const Dataset &raw, const ExperimentConfig &cfg);

ReplicateResult run_replicate(const PreparedSource &source, const ExperimentConfig &cfg, int index);

/// Loads and normalizes the dataset, runs every replicate (on `threads`
/// workers; the result does not depend on the count) and aggregates.
ExperimentResult run_experiment(const ExperimentConfig &cfg, int threads = 1);
/// Same, on a source dataset already in memory.
ExperimentResult run_experiment(const ExperimentConfig &cfg, const Dataset &raw_source, int threads);

std::vector<MethodSummary> summarize(const std::vector<Method> &methods, const std::vector<ReplicateResult> &reps);

nlohmann::json to_json(const ExperimentResult &result);
std::string format_table(const ExperimentResult &result);

}  // namespace shiftlab
