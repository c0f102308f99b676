#include "shiftlab/error.hpp"
#include "shiftlab/experiment.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <string>

using namespace shiftlab;
using nlohmann::json;

namespace {

Dataset toy_source() {
    Rng rng(77);
    return shiftlab::testing::gaussian_blobs(120, 3, 2.0, rng);
}

ExperimentConfig toy_config(std::vector<Method> methods, int replicates) {
    json j{{"dataset", "toy.csv"},
           {"methods", json::array()},
           {"replicates", replicates},
           {"bias", {{"n_train", 30}, {"n_test", 30}, {"split_feature", 1}}},
           {"lambda_grid", {1.0 / 256.0, 1.0}},
           {"master_seed", 5},
           {"subgradient_iterations", 50},
           {"max_iterations", 200}};
    for (const Method m : methods) {
        j["methods"].push_back(to_string(m));
    }
    return parse_config(j);
}

ReplicateResult fake_replicate(int index, double lr_acc, double iw_acc, double lr_ll, double iw_ll) {
    ReplicateResult r;
    r.index = index;
    r.outcomes[Method::LR] = {1.0, lr_ll, lr_acc};
    r.outcomes[Method::IWLR] = {1.0, iw_ll, iw_acc};
    return r;
}

}  // namespace

TEST_CASE("parse_config defaults and keys") {
    const ExperimentConfig cfg = parse_config(json{{"dataset", "data/x.csv"}, {"methods", {"lr", "robust-01"}}}, "/base");
    CHECK(cfg.dataset == std::filesystem::path("/base/data/x.csv"));
    CHECK(cfg.methods == std::vector<Method>{Method::LR, Method::Robust01});
    CHECK(cfg.replicates == 30);
    CHECK(cfg.bias.a_interval.lo == 1.0);
    CHECK(cfg.bias.b_interval.hi == 5.0);
    CHECK(cfg.lambda_grid == default_lambda_grid());
    CHECK(cfg.kl_threshold == 0.1);
    CHECK(cfg.clip_rho == 100.0);
    CHECK(cfg.label_col == std::optional<std::string>("label"));
    CHECK_FALSE(cfg.pca_dims_per_view.has_value());

    const ExperimentConfig lang =
        parse_config(json{{"dataset", "/abs.csv"}, {"methods", {"lr"}}, {"preset", "language"}}, "/base");
    CHECK(lang.dataset == std::filesystem::path("/abs.csv"));
    CHECK(lang.pca_dims_per_view == 100);
    CHECK(lang.bias.n_train == 500);
    CHECK(lang.bias.n_test == 500);
}

TEST_CASE("parse_config errors") {
    const json base{{"dataset", "x.csv"}, {"methods", {"lr"}}};
    CHECK_THROWS_AS((void)parse_config(json::array()), ConfigError);
    CHECK_THROWS_AS((void)parse_config(json{{"methods", {"lr"}}}), ConfigError);
    CHECK_THROWS_AS((void)parse_config(json{{"dataset", "x.csv"}, {"methods", json::array()}}), ConfigError);
    CHECK_THROWS_AS((void)parse_config(json{{"dataset", "x.csv"}, {"methods", {"lr", "lr"}}}), ConfigError);
    CHECK_THROWS_AS((void)parse_config(json{{"dataset", "x.csv"}, {"methods", {"kernel-svm"}}}), ConfigError);
    for (const auto &[key, value] : std::vector<std::pair<std::string, json>>{
             {"replicates", 0},
             {"clip_rho", 0.5},
             {"lambda_grid", json::array()},
             {"preset", "images"},
             {"bias", {{"a_interval", {3.0, 1.0}}}},
             {"bias", {{"b_interval", {1.0}}}},
             {"pca_dims_per_view", 0},
             {"subgradient_iterations", 0},
             {"replicates", "many"}}) {
        json j = base;
        j[key] = value;
        CAPTURE(key);
        CHECK_THROWS_AS((void)parse_config(j), ConfigError);
    }
}

TEST_CASE("config JSON echo") {
    const ExperimentConfig cfg = toy_config({Method::LR, Method::RobustMultiview}, 2);
    const json j = to_json(cfg);
    CHECK(j.at("dataset") == "toy.csv");
    CHECK(j.at("methods") == json{"lr", "robust-multiview"});
    CHECK(j.at("bias").at("n_train") == 30);
    CHECK(j.at("master_seed") == 5);
    const ExperimentConfig again = parse_config(j);
    CHECK(again.methods == cfg.methods);
    CHECK(again.lambda_grid == cfg.lambda_grid);
    CHECK(again.bias.split_feature == 1);
}

TEST_CASE("single replicate smoke run") {
    const ExperimentResult r = run_experiment(toy_config({Method::LR}, 1), toy_source(), 1);
    REQUIRE(r.replicates.size() == 1);
    REQUIRE(r.summary.size() == 1);
    const MethodOutcome &o = r.replicates[0].outcomes.at(Method::LR);
    REQUIRE(o.logloss.has_value());
    CHECK(*o.logloss > 0.0);
    CHECK(o.accuracy >= 0.0);
    CHECK(o.accuracy <= 1.0);
    CHECK(r.summary[0].best_accuracy);
    const std::string table = format_table(r);
    CHECK(table.find("lr") != std::string::npos);
    const json j = to_json(r);
    CHECK(j.at("replicates").size() == 1);
}

TEST_CASE("experiment results do not depend on the thread count") {
    const ExperimentConfig cfg = toy_config({Method::LR, Method::IWLR, Method::RobustMultiview, Method::Adv01}, 3);
    const Dataset src = toy_source();
    const std::string one = to_json(run_experiment(cfg, src, 1)).dump();
    const std::string three = to_json(run_experiment(cfg, src, 3)).dump();
    CHECK(one == three);
    CHECK(to_json(run_experiment(cfg, src, 2)).dump() == one);
}

TEST_CASE("replicate failures carry the replicate index") {
    ExperimentConfig cfg = toy_config({Method::LR}, 2);
    cfg.bias.n_train = 61;  // the lower portion holds 60 rows
    try {
        (void)run_experiment(cfg, toy_source(), 2);
        FAIL("expected a DataError");
    } catch (const DataError &e) {
        CHECK(std::string(e.what()).rfind("replicate 0: ", 0) == 0);
    }
}

TEST_CASE("summarize marks the best and the indistinguishable") {
    std::vector<ReplicateResult> reps;
    for (int i = 0; i < 10; ++i) {
        const double noise = 0.01 * ((i * 7) % 5);
        reps.push_back(fake_replicate(i, 0.8 + noise, 0.6 + noise, 0.5 + noise, 0.5 + noise + (i % 2 == 1 ? 0.01 : -0.009)));
    }
    const auto s = summarize({Method::LR, Method::IWLR}, reps);
    REQUIRE(s.size() == 2);
    CHECK(s[0].best_accuracy);
    CHECK_FALSE(s[1].best_accuracy);
    CHECK(s[0].best_logloss);
    CHECK(s[1].best_logloss);  // mean difference 0.0005 with p > 0.05
    CHECK(s[0].mean_accuracy == doctest::Approx(0.82));
    CHECK(*s[1].mean_logloss == doctest::Approx(0.5205));
}

TEST_CASE("prepare_source normalizes and reduces") {
    const Dataset src = toy_source();
    ExperimentConfig cfg = toy_config({Method::LR}, 1);
    const PreparedSource plain = prepare_source(src, cfg);
    CHECK(plain.data.features().minCoeff() == doctest::Approx(0.0));
    CHECK(plain.data.features().maxCoeff() == doctest::Approx(1.0));
    CHECK_FALSE(plain.views.has_value());

    cfg.views = std::vector<std::vector<int>>{{0, 1}, {2}};
    cfg.pca_dims_per_view = 1;
    cfg.bias.split_feature = 0;
    const PreparedSource reduced = prepare_source(src, cfg);
    CHECK(reduced.data.dim() == 2);
    REQUIRE(reduced.views.has_value());
    CHECK(*reduced.views == std::vector<std::vector<int>>{{0}, {1}});
}
