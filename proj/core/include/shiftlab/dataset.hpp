#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace shiftlab {

enum class SourceTag { Train, Test, Unlabeled };

/// Feature matrix (rows are samples) with optional dense integer labels.
///
/// Immutable after construction. Labels, when present, lie in {0..K-1}; every
/// feature value is finite.
class Dataset {
  public:
    Dataset() = default;
    Dataset(Eigen::MatrixXd features, std::optional<std::vector<int>> labels, int class_count,
            SourceTag tag = SourceTag::Train, std::vector<std::string> feature_names = {});

    /// Unlabeled inputs; class_count defaults to 2 and is irrelevant for most uses.
    static Dataset inputs(Eigen::MatrixXd features, SourceTag tag = SourceTag::Unlabeled);

    [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(features_.rows()); }
    [[nodiscard]] int dim() const { return static_cast<int>(features_.cols()); }
    [[nodiscard]] bool labeled() const { return labels_.has_value(); }
    [[nodiscard]] int class_count() const { return class_count_; }
    [[nodiscard]] SourceTag tag() const { return tag_; }

    [[nodiscard]] const Eigen::MatrixXd &features() const { return features_; }
    [[nodiscard]] Eigen::VectorXd row(std::size_t i) const {
        return features_.row(static_cast<Eigen::Index>(i)).transpose();
    }
    /// Throws DataError when the dataset is unlabeled.
    [[nodiscard]] std::span<const int> labels() const;
    [[nodiscard]] int label(std::size_t i) const { return labels()[i]; }
    [[nodiscard]] const std::vector<std::string> &feature_names() const { return names_; }

    [[nodiscard]] Dataset subset(std::span<const std::size_t> rows) const;
    [[nodiscard]] Dataset with_tag(SourceTag tag) const;
    [[nodiscard]] Dataset without_labels() const;
    [[nodiscard]] Dataset with_features(Eigen::MatrixXd features) const;

  private:
    Eigen::MatrixXd features_;
    std::optional<std::vector<int>> labels_;
    int class_count_ = 2;
    SourceTag tag_ = SourceTag::Train;
    std::vector<std::string> names_;
};

/// Reads a header-first CSV. `label_column` names the label column; when it is
/// nullopt every column is a feature. Row numbers in errors are 1-based data rows.
Dataset load_csv(const std::filesystem::path &path, const std::optional<std::string> &label_column = "label");

/// Writes features (and labels as a trailing "label" column) using shortest
/// round-trip decimal formatting, so load_csv(save_csv(d)) reproduces d exactly.
void save_csv(const Dataset &data, const std::filesystem::path &path, const std::string &label_column = "label");

/// True when the file's header contains `column`.
bool csv_has_column(const std::filesystem::path &path, const std::string &column);

struct ColumnStats {
    Eigen::VectorXd min;
    Eigen::VectorXd max;
};

ColumnStats column_stats(const Eigen::MatrixXd &features);

/// Affine map of each column onto [0,1] using `stats` (computed from `data`
/// when absent), clipped to [0,1]. Constant columns map to 0.
std::pair<Dataset, ColumnStats> normalize_unit_interval(const Dataset &data,
                                                        const std::optional<ColumnStats> &stats = std::nullopt);

/// Assignment of feature indices to views plus the generalized / non-generalized split.
class ViewPartition {
  public:
    ViewPartition() = default;
    /// Validates that views are disjoint, nonempty and cover {0..dim-1}.
    ViewPartition(std::vector<std::vector<int>> views, const std::vector<int> &generalized, int dim);

    /// All features in one view, not generalized.
    static ViewPartition single(int dim);
    /// One view per feature, none generalized.
    static ViewPartition per_feature(int dim);

    [[nodiscard]] int view_count() const { return static_cast<int>(views_.size()); }
    [[nodiscard]] int dim() const { return dim_; }
    [[nodiscard]] const std::vector<int> &indices(int view) const { return views_.at(static_cast<std::size_t>(view)); }
    [[nodiscard]] const std::vector<std::vector<int>> &views() const { return views_; }
    [[nodiscard]] bool is_generalized(int view) const { return generalized_.at(static_cast<std::size_t>(view)); }
    [[nodiscard]] std::vector<int> generalized() const;
    [[nodiscard]] std::vector<int> non_generalized() const;

    [[nodiscard]] ViewPartition with_generalized(const std::vector<int> &generalized) const;

    /// x_v: the entries of `x` belonging to `view`.
    [[nodiscard]] Eigen::VectorXd extract(int view, const Eigen::Ref<const Eigen::VectorXd> &x) const;
    [[nodiscard]] Eigen::MatrixXd extract_columns(int view, const Eigen::MatrixXd &features) const;

    friend bool operator==(const ViewPartition &, const ViewPartition &) = default;

  private:
    std::vector<std::vector<int>> views_;
    std::vector<bool> generalized_;
    int dim_ = 0;
};

/// Class-indicator times (bias, x_v) features for every view.
///
/// phi_v(x_v, y) has K*(|x_v|+1) entries; only the block of class y is nonzero
/// and equals (1, x_v).
class FeatureMap {
  public:
    FeatureMap() = default;
    FeatureMap(ViewPartition partition, int class_count);

    [[nodiscard]] const ViewPartition &partition() const { return partition_; }
    [[nodiscard]] int class_count() const { return classes_; }
    [[nodiscard]] int view_count() const { return partition_.view_count(); }
    [[nodiscard]] int input_dim() const { return partition_.dim(); }
    [[nodiscard]] int block_dim(int view) const;
    /// Sum of block_dim over views; the length of a flattened theta.
    [[nodiscard]] int total_dim() const { return total_; }
    /// Offset of view `view` inside a flattened theta.
    [[nodiscard]] int offset(int view) const { return offsets_.at(static_cast<std::size_t>(view)); }

    /// Throws DataError on size mismatch or label out of range.
    [[nodiscard]] Eigen::VectorXd phi(int view, const Eigen::Ref<const Eigen::VectorXd> &x_view, int y) const;

    /// theta_v . phi_v(x_v, y) for the view whose features are read from the full input `x`.
    [[nodiscard]] double view_score(int view, const Eigen::Ref<const Eigen::VectorXd> &theta_view,
                                    const Eigen::Ref<const Eigen::VectorXd> &x, int y) const;

    /// out += weight * phi_v(x_v, y), where x_v is read from the full input `x`.
    void accumulate(int view, const Eigen::Ref<const Eigen::VectorXd> &x, int y, double weight,
                    Eigen::Ref<Eigen::VectorXd> out) const;

    /// Splits a flattened theta into per-view blocks and back.
    [[nodiscard]] std::vector<Eigen::VectorXd> split(const Eigen::VectorXd &flat) const;
    [[nodiscard]] Eigen::VectorXd join(const std::vector<Eigen::VectorXd> &blocks) const;

  private:
    ViewPartition partition_;
    int classes_ = 2;
    std::vector<int> offsets_;
    int total_ = 0;
};

}  // namespace shiftlab
