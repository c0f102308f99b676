#include "shiftlab/dataset.hpp"

#include "shiftlab/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string_view>

namespace shiftlab {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return cells;
}

std::optional<double> parse_double(std::string_view cell) {
    if (!cell.empty() && cell.front() == '+') {
        cell.remove_prefix(1);
    }
    double value = 0.0;
    const auto *end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
    if (cell.empty() || ec != std::errc{} || ptr != end) {
        return std::nullopt;
    }
    return value;
}

std::string format_double(double value) {
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, ptr);
}

std::string read_header(std::ifstream &in, const std::filesystem::path &path) {
    std::string header;
    if (!std::getline(in, header)) {
        throw DataError("empty CSV file: " + path.string());
    }
    // UTF-8 byte order mark
    if (header.size() >= 3 && header.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        header.erase(0, 3);
    }
    return header;
}

}  // namespace

Dataset::Dataset(Eigen::MatrixXd features, std::optional<std::vector<int>> labels, int class_count, SourceTag tag,
                 std::vector<std::string> feature_names)
    : features_(std::move(features)), labels_(std::move(labels)), class_count_(class_count), tag_(tag),
      names_(std::move(feature_names)) {
    if (class_count_ < 2) {
        throw DataError("class_count must be at least 2");
    }
    if (!features_.allFinite()) {
        throw DataError("feature matrix contains non-finite values");
    }
    if (labels_) {
        if (labels_->size() != size()) {
            throw DataError("label vector length does not match the number of rows");
        }
        for (std::size_t i = 0; i < labels_->size(); ++i) {
            const int y = (*labels_)[i];
            if (y < 0 || y >= class_count_) {
                throw DataError("label " + std::to_string(y) + " at row " + std::to_string(i + 1) +
                                " outside {0.." + std::to_string(class_count_ - 1) + "}");
            }
        }
    }
    if (names_.empty()) {
        names_.reserve(static_cast<std::size_t>(dim()));
        for (int j = 0; j < dim(); ++j) {
            names_.push_back("f" + std::to_string(j));
        }
    } else if (static_cast<int>(names_.size()) != dim()) {
        throw DataError("feature name count does not match column count");
    }
}

Dataset Dataset::inputs(Eigen::MatrixXd features, SourceTag tag) {
    return Dataset(std::move(features), std::nullopt, 2, tag);
}

std::span<const int> Dataset::labels() const {
    if (!labels_) {
        throw DataError("dataset has no labels");
    }
    return *labels_;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows.size()), features_.cols());
    std::optional<std::vector<int>> sub_labels;
    if (labels_) {
        sub_labels.emplace();
        sub_labels->reserve(rows.size());
    }
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (rows[k] >= size()) {
            throw DataError("subset row index out of range");
        }
        sub.row(static_cast<Eigen::Index>(k)) = features_.row(static_cast<Eigen::Index>(rows[k]));
        if (labels_) {
            sub_labels->push_back((*labels_)[rows[k]]);
        }
    }
    return Dataset(std::move(sub), std::move(sub_labels), class_count_, tag_, names_);
}

Dataset Dataset::with_tag(SourceTag tag) const {
    Dataset copy = *this;
    copy.tag_ = tag;
    return copy;
}

Dataset Dataset::without_labels() const {
    Dataset copy = *this;
    copy.labels_.reset();
    return copy;
}

Dataset Dataset::with_features(Eigen::MatrixXd features) const {
    if (features.rows() != features_.rows()) {
        throw DataError("replacement feature matrix has a different row count");
    }
    std::vector<std::string> names;
    if (features.cols() == features_.cols()) {
        names = names_;
    }
    return Dataset(std::move(features), labels_, class_count_, tag_, std::move(names));
}

bool csv_has_column(const std::filesystem::path &path, const std::string &column) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open file: " + path.string());
    }
    const std::string header = read_header(in, path);
    for (const auto cell : split_commas(header)) {
        if (cell == column) {
            return true;
        }
    }
    return false;
}

Dataset load_csv(const std::filesystem::path &path, const std::optional<std::string> &label_column) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open file: " + path.string());
    }
    const std::string header = read_header(in, path);
    const auto header_cells = split_commas(header);
    const auto columns = header_cells.size();

    std::optional<std::size_t> label_index;
    std::vector<std::string> names;
    for (std::size_t j = 0; j < columns; ++j) {
        if (label_column && header_cells[j] == *label_column) {
            if (label_index) {
                throw DataError("duplicate label column '" + *label_column + "'");
            }
            label_index = j;
        } else {
            names.emplace_back(header_cells[j]);
        }
    }
    if (label_column && !label_index) {
        throw DataError("label column '" + *label_column + "' not found in " + path.string());
    }

    std::vector<double> values;
    std::vector<int> labels;
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        ++rows;
        const auto cells = split_commas(line);
        if (cells.size() != columns) {
            throw DataError("row " + std::to_string(rows) + " has " + std::to_string(cells.size()) +
                            " cells, header has " + std::to_string(columns));
        }
        for (std::size_t j = 0; j < columns; ++j) {
            const auto parsed = parse_double(cells[j]);
            if (!parsed || !std::isfinite(*parsed)) {
                throw DataError("non-numeric cell '" + std::string(cells[j]) + "' at row " + std::to_string(rows) +
                                ", column " + std::to_string(j + 1) + " (" + std::string(header_cells[j]) + ")");
            }
            if (label_index && j == *label_index) {
                const double v = *parsed;
                if (v != std::floor(v) || v < 0.0 || v > 1.0e6) {
                    throw DataError("label '" + std::string(cells[j]) + "' at row " + std::to_string(rows) +
                                    " is not a non-negative integer");
                }
                labels.push_back(static_cast<int>(v));
            } else {
                values.push_back(*parsed);
            }
        }
    }

    const auto d = static_cast<Eigen::Index>(names.size());
    Eigen::MatrixXd features(static_cast<Eigen::Index>(rows), d);
    for (std::size_t i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            features(static_cast<Eigen::Index>(i), j) = values[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)];
        }
    }
    if (!label_index) {
        return Dataset(std::move(features), std::nullopt, 2, SourceTag::Unlabeled, std::move(names));
    }
    const int max_label = labels.empty() ? 1 : *std::max_element(labels.begin(), labels.end());
    const int k = std::max(2, max_label + 1);
    return Dataset(std::move(features), std::move(labels), k, SourceTag::Train, std::move(names));
}

void save_csv(const Dataset &data, const std::filesystem::path &path, const std::string &label_column) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write file: " + path.string());
    }
    const auto &names = data.feature_names();
    for (std::size_t j = 0; j < names.size(); ++j) {
        out << (j ? "," : "") << names[j];
    }
    if (data.labeled()) {
        out << (names.empty() ? "" : ",") << label_column;
    }
    out << '\n';
    const auto &x = data.features();
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            out << (j ? "," : "") << format_double(x(i, j));
        }
        if (data.labeled()) {
            out << (x.cols() ? "," : "") << data.label(static_cast<std::size_t>(i));
        }
        out << '\n';
    }
}

ColumnStats column_stats(const Eigen::MatrixXd &features) {
    if (features.rows() == 0) {
        throw DataError("cannot compute column statistics of an empty matrix");
    }
    return ColumnStats{features.colwise().minCoeff().transpose(), features.colwise().maxCoeff().transpose()};
}

std::pair<Dataset, ColumnStats> normalize_unit_interval(const Dataset &data, const std::optional<ColumnStats> &stats) {
    ColumnStats s = stats ? *stats : column_stats(data.features());
    if (s.min.size() != data.dim() || s.max.size() != data.dim()) {
        throw DataError("normalization statistics do not match the feature dimension");
    }
    Eigen::MatrixXd x = data.features();
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double range = s.max(j) - s.min(j);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            x(i, j) = range > 0.0 ? std::clamp((x(i, j) - s.min(j)) / range, 0.0, 1.0) : 0.0;
        }
    }
    return {data.with_features(std::move(x)), std::move(s)};
}

// ---------------------------------------------------------------------------

ViewPartition::ViewPartition(std::vector<std::vector<int>> views, const std::vector<int> &generalized, int dim)
    : views_(std::move(views)), generalized_(views_.size(), false), dim_(dim) {
    if (views_.empty()) {
        throw DataError("view partition needs at least one view");
    }
    std::vector<int> seen(static_cast<std::size_t>(std::max(dim, 0)), 0);
    for (const auto &view : views_) {
        if (view.empty()) {
            throw DataError("view partition contains an empty view");
        }
        for (const int idx : view) {
            if (idx < 0 || idx >= dim) {
                throw DataError("view index " + std::to_string(idx) + " outside feature range");
            }
            if (seen[static_cast<std::size_t>(idx)]++) {
                throw DataError("feature " + std::to_string(idx) + " assigned to more than one view");
            }
        }
    }
    for (int j = 0; j < dim; ++j) {
        if (!seen[static_cast<std::size_t>(j)]) {
            throw DataError("feature " + std::to_string(j) + " not assigned to any view");
        }
    }
    for (const int v : generalized) {
        if (v < 0 || v >= view_count()) {
            throw DataError("generalized view id " + std::to_string(v) + " out of range");
        }
        generalized_[static_cast<std::size_t>(v)] = true;
    }
}

ViewPartition ViewPartition::single(int dim) {
    std::vector<int> all(static_cast<std::size_t>(dim));
    std::iota(all.begin(), all.end(), 0);
    return ViewPartition({all}, {}, dim);
}

ViewPartition ViewPartition::per_feature(int dim) {
    std::vector<std::vector<int>> views;
    for (int j = 0; j < dim; ++j) {
        views.push_back({j});
    }
    return ViewPartition(std::move(views), {}, dim);
}

std::vector<int> ViewPartition::generalized() const {
    std::vector<int> out;
    for (int v = 0; v < view_count(); ++v) {
        if (generalized_[static_cast<std::size_t>(v)]) {
            out.push_back(v);
        }
    }
    return out;
}

std::vector<int> ViewPartition::non_generalized() const {
    std::vector<int> out;
    for (int v = 0; v < view_count(); ++v) {
        if (!generalized_[static_cast<std::size_t>(v)]) {
            out.push_back(v);
        }
    }
    return out;
}

ViewPartition ViewPartition::with_generalized(const std::vector<int> &generalized) const {
    return ViewPartition(views_, generalized, dim_);
}

Eigen::VectorXd ViewPartition::extract(int view, const Eigen::Ref<const Eigen::VectorXd> &x) const {
    if (x.size() != dim_) {
        throw DataError("input dimension " + std::to_string(x.size()) + " does not match partition dimension " +
                        std::to_string(dim_));
    }
    const auto &idx = indices(view);
    Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
        out(static_cast<Eigen::Index>(k)) = x(idx[k]);
    }
    return out;
}

Eigen::MatrixXd ViewPartition::extract_columns(int view, const Eigen::MatrixXd &features) const {
    if (features.cols() != dim_) {
        throw DataError("feature matrix width does not match partition dimension");
    }
    const auto &idx = indices(view);
    Eigen::MatrixXd out(features.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
        out.col(static_cast<Eigen::Index>(k)) = features.col(idx[k]);
    }
    return out;
}

// ---------------------------------------------------------------------------

FeatureMap::FeatureMap(ViewPartition partition, int class_count)
    : partition_(std::move(partition)), classes_(class_count) {
    if (classes_ < 2) {
        throw DataError("feature map needs at least two classes");
    }
    for (int v = 0; v < partition_.view_count(); ++v) {
        offsets_.push_back(total_);
        total_ += block_dim(v);
    }
}

int FeatureMap::block_dim(int view) const {
    return classes_ * (static_cast<int>(partition_.indices(view).size()) + 1);
}

Eigen::VectorXd FeatureMap::phi(int view, const Eigen::Ref<const Eigen::VectorXd> &x_view, int y) const {
    const auto n = static_cast<Eigen::Index>(partition_.indices(view).size());
    if (x_view.size() != n) {
        throw DataError("view input has " + std::to_string(x_view.size()) + " entries, view " + std::to_string(view) +
                        " has " + std::to_string(n));
    }
    if (y < 0 || y >= classes_) {
        throw DataError("class id " + std::to_string(y) + " out of range");
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(block_dim(view));
    out(y * (n + 1)) = 1.0;
    out.segment(y * (n + 1) + 1, n) = x_view;
    return out;
}

double FeatureMap::view_score(int view, const Eigen::Ref<const Eigen::VectorXd> &theta_view,
                              const Eigen::Ref<const Eigen::VectorXd> &x, int y) const {
    const auto &idx = partition_.indices(view);
    const auto stride = static_cast<Eigen::Index>(idx.size()) + 1;
    const Eigen::Index base = y * stride;
    double s = theta_view(base);
    for (std::size_t k = 0; k < idx.size(); ++k) {
        s += theta_view(base + 1 + static_cast<Eigen::Index>(k)) * x(idx[k]);
    }
    return s;
}

void FeatureMap::accumulate(int view, const Eigen::Ref<const Eigen::VectorXd> &x, int y, double weight,
                            Eigen::Ref<Eigen::VectorXd> out) const {
    const auto &idx = partition_.indices(view);
    const auto stride = static_cast<Eigen::Index>(idx.size()) + 1;
    const Eigen::Index base = y * stride;
    out(base) += weight;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        out(base + 1 + static_cast<Eigen::Index>(k)) += weight * x(idx[k]);
    }
}

std::vector<Eigen::VectorXd> FeatureMap::split(const Eigen::VectorXd &flat) const {
    if (flat.size() != total_) {
        throw DataError("parameter vector length does not match the feature map");
    }
    std::vector<Eigen::VectorXd> blocks;
    for (int v = 0; v < view_count(); ++v) {
        blocks.emplace_back(flat.segment(offset(v), block_dim(v)));
    }
    return blocks;
}

Eigen::VectorXd FeatureMap::join(const std::vector<Eigen::VectorXd> &blocks) const {
    if (static_cast<int>(blocks.size()) != view_count()) {
        throw DataError("expected one parameter block per view");
    }
    Eigen::VectorXd flat(total_);
    for (int v = 0; v < view_count(); ++v) {
        if (blocks[static_cast<std::size_t>(v)].size() != block_dim(v)) {
            throw DataError("parameter block " + std::to_string(v) + " has the wrong length");
        }
        flat.segment(offset(v), block_dim(v)) = blocks[static_cast<std::size_t>(v)];
    }
    return flat;
}

}  // namespace shiftlab
