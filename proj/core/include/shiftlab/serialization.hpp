#pragma once

#include "shiftlab/dataset.hpp"
#include "shiftlab/density.hpp"
#include "shiftlab/methods.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>

namespace shiftlab {

nlohmann::json to_json(const Discriminator &d);
Discriminator discriminator_from_json(const nlohmann::json &j);

/// {"joint": ..., "views": {"0": ..., "1": ...}, "clip": rho}
nlohmann::json to_json(const RatioProvider &rp);
/// The partition is not part of the provider record and must be supplied.
RatioProvider ratio_provider_from_json(const nlohmann::json &j, const ViewPartition &partition);

nlohmann::json to_json(const ViewPartition &p);
ViewPartition view_partition_from_json(const nlohmann::json &j, int dim);

/// A model file: the fitted parameters plus whatever is needed to predict
/// without the training data (partition, ratios, input normalization).
struct ModelFile {
    Model model;
    std::optional<ColumnStats> normalization;
};

nlohmann::json to_json(const Model &model, const std::optional<ColumnStats> &normalization = std::nullopt);
ModelFile model_from_json(const nlohmann::json &j);

void save_model(const ModelFile &file, const std::filesystem::path &path);
ModelFile load_model(const std::filesystem::path &path);

nlohmann::json read_json_file(const std::filesystem::path &path);
void write_json_file(const nlohmann::json &j, const std::filesystem::path &path);

}  // namespace shiftlab
