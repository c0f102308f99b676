#include "shiftlab/serialization.hpp"

#include "shiftlab/error.hpp"

#include <fstream>

namespace shiftlab {

using nlohmann::json;

namespace {

json vector_json(const Eigen::VectorXd &v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from(const json &j, const char *what) {
    if (!j.is_array()) {
        throw DataError(std::string(what) + " must be an array of numbers");
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) {
            throw DataError(std::string(what) + " must be an array of numbers");
        }
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

const json &field(const json &j, const char *key) {
    if (!j.is_object() || !j.contains(key)) {
        throw DataError(std::string("missing JSON field '") + key + "'");
    }
    return j.at(key);
}

json theta_json(const std::vector<Eigen::VectorXd> &theta) {
    json out = json::object();
    for (std::size_t v = 0; v < theta.size(); ++v) {
        out[std::to_string(v)] = vector_json(theta[v]);
    }
    return out;
}

std::vector<Eigen::VectorXd> theta_from(const json &j, int views) {
    std::vector<Eigen::VectorXd> theta;
    for (int v = 0; v < views; ++v) {
        theta.push_back(vector_from(field(j, std::to_string(v).c_str()), "theta block"));
    }
    return theta;
}

json stats_json(const ColumnStats &s) {
    return {{"min", vector_json(s.min)}, {"max", vector_json(s.max)}};
}

}  // namespace

json to_json(const Discriminator &d) {
    return {{"weights", vector_json(d.weights)}, {"lambda", d.lambda}, {"prior_ratio", d.prior_ratio}};
}

Discriminator discriminator_from_json(const json &j) {
    Discriminator d;
    d.weights = vector_from(field(j, "weights"), "discriminator weights");
    d.lambda = field(j, "lambda").get<double>();
    d.prior_ratio = field(j, "prior_ratio").get<double>();
    if (d.weights.size() < 1 || !d.weights.allFinite() || !(d.prior_ratio > 0.0)) {
        throw DataError("invalid discriminator record");
    }
    return d;
}

json to_json(const RatioProvider &rp) {
    json views = json::object();
    for (std::size_t v = 0; v < rp.views().size(); ++v) {
        views[std::to_string(v)] = to_json(rp.views()[v]);
    }
    return {{"joint", to_json(rp.joint())}, {"views", views}, {"clip", rp.clip()}};
}

RatioProvider ratio_provider_from_json(const json &j, const ViewPartition &partition) {
    std::vector<Discriminator> views;
    const json &record = field(j, "views");
    for (int v = 0; v < partition.view_count(); ++v) {
        views.push_back(discriminator_from_json(field(record, std::to_string(v).c_str())));
    }
    return {discriminator_from_json(field(j, "joint")), std::move(views), partition, field(j, "clip").get<double>()};
}

json to_json(const ViewPartition &p) {
    return {{"views", p.views()}, {"generalized", p.generalized()}};
}

ViewPartition view_partition_from_json(const json &j, int dim) {
    try {
        const auto views = field(j, "views").get<std::vector<std::vector<int>>>();
        const auto generalized = j.contains("generalized") ? j.at("generalized").get<std::vector<int>>() : std::vector<int>{};
        return {views, generalized, dim};
    } catch (const json::exception &e) {
        throw DataError(std::string("malformed view partition: ") + e.what());
    }
}

json to_json(const Model &model, const std::optional<ColumnStats> &normalization) {
    json out;
    out["method"] = to_string(model.method());
    if (const auto *lin = std::get_if<LinearClassifier>(&model.impl())) {
        out["kind"] = to_string(lin->kind);
        json rows = json::array();
        for (Eigen::Index r = 0; r < lin->weights.rows(); ++r) {
            rows.push_back(vector_json(lin->weights.row(r).transpose()));
        }
        out["weights"] = rows;
        out["lambda"] = lin->lambda;
    } else if (const auto *rl = std::get_if<RobustLoglossModel>(&model.impl())) {
        if (rl->spec().kind == GeneralizationKind::Custom) {
            throw ConfigError("models with a custom generalization ratio cannot be saved");
        }
        out["loss"] = "logloss";
        out["spec"] = to_string(rl->spec().kind);
        out["theta"] = theta_json(rl->theta());
        out["lambda"] = rl->lambda();
        out["views"] = to_json(rl->feature_map().partition());
        out["class_count"] = rl->class_count();
        out["ratios"] = to_json(*rl->ratios());
    } else {
        const auto &rz = std::get<RobustZeroOneModel>(model.impl());
        out["loss"] = "zero-one";
        out["mode"] = to_string(rz.mode());
        out["theta"] = theta_json(rz.theta());
        out["epsilon"] = rz.epsilon();
        out["views"] = to_json(rz.feature_map().partition());
        out["class_count"] = rz.class_count();
        if (rz.ratios()) {
            out["ratios"] = to_json(*rz.ratios());
        }
    }
    if (normalization) {
        out["normalization"] = stats_json(*normalization);
    }
    return out;
}

ModelFile model_from_json(const json &j) {
    try {
        const Method method = parse_method(field(j, "method").get<std::string>());
        std::optional<ColumnStats> norm;
        if (j.contains("normalization")) {
            norm = ColumnStats{vector_from(field(j["normalization"], "min"), "normalization min"),
                               vector_from(field(j["normalization"], "max"), "normalization max")};
        }
        if (j.contains("weights")) {
            const json &rows = field(j, "weights");
            if (!rows.is_array() || rows.empty()) {
                throw DataError("linear model weights must be a nonempty array of rows");
            }
            Eigen::MatrixXd w;
            for (std::size_t r = 0; r < rows.size(); ++r) {
                const Eigen::VectorXd row = vector_from(rows[r], "weight row");
                if (r == 0) {
                    w.resize(static_cast<Eigen::Index>(rows.size()), row.size());
                } else if (row.size() != w.cols()) {
                    throw DataError("weight rows have different lengths");
                }
                w.row(static_cast<Eigen::Index>(r)) = row.transpose();
            }
            if (!w.allFinite()) {
                throw DataError("linear model weights are not finite");
            }
            const std::string kind = field(j, "kind").get<std::string>();
            LinearKind lk = LinearKind::LR;
            for (const LinearKind cand : {LinearKind::LR, LinearKind::IWLR, LinearKind::SVM, LinearKind::IWSVM}) {
                if (to_string(cand) == kind) {
                    lk = cand;
                }
            }
            return {Model(method, LinearClassifier{w, lk, field(j, "lambda").get<double>()}), norm};
        }
        const json &views = field(j, "views");
        int dim = 0;
        for (const auto &v : field(views, "views")) {
            dim += static_cast<int>(v.size());
        }
        const ViewPartition partition = view_partition_from_json(views, dim);
        const FeatureMap fmap(partition, field(j, "class_count").get<int>());
        std::shared_ptr<const RatioProvider> ratios;
        if (j.contains("ratios")) {
            ratios = std::make_shared<const RatioProvider>(ratio_provider_from_json(j.at("ratios"), partition));
        }
        const auto theta = theta_from(field(j, "theta"), partition.view_count());
        const std::string loss = field(j, "loss").get<std::string>();
        if (loss == "logloss") {
            const auto kind = parse_generalization_kind(field(j, "spec").get<std::string>());
            return {Model(method, RobustLoglossModel(fmap, GeneralizationSpec{kind, {}}, ratios,
                                                     field(j, "lambda").get<double>(), theta)),
                    norm};
        }
        if (loss == "zero-one") {
            const auto mode = parse_zero_one_mode(field(j, "mode").get<std::string>());
            return {Model(method, RobustZeroOneModel(fmap, mode, ratios, field(j, "epsilon").get<double>(), theta)),
                    norm};
        }
        throw DataError("unknown model loss '" + loss + "'");
    } catch (const json::exception &e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    }
}

void save_model(const ModelFile &file, const std::filesystem::path &path) {
    write_json_file(to_json(file.model, file.normalization), path);
}

ModelFile load_model(const std::filesystem::path &path) {
    return model_from_json(read_json_file(path));
}

json read_json_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_json_file(const json &j, const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open " + path.string() + " for writing");
    }
    out << j.dump(2) << '\n';
    if (!out) {
        throw DataError("failed writing " + path.string());
    }
}

}  // namespace shiftlab
