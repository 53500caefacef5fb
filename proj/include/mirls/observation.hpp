#pragma once

#include <compare>
#include <memory>
#include <vector>

#include <Eigen/Core>

namespace mirls {

using Eigen::Index;

struct IndexPair {
  Index row = 0;
  Index col = 0;
  auto operator<=>(const IndexPair&) const = default;
};

/// Sampling set Omega inside a d1 x d2 grid.
///
/// Entries are kept distinct and sorted row-major, so every operator that
/// walks the pattern visits entries in the same order.
class SamplingPattern {
 public:
  SamplingPattern(Index d1, Index d2, std::vector<IndexPair> entries);

  Index rows() const { return d1_; }
  Index cols() const { return d2_; }
  Index size() const { return static_cast<Index>(row_.size()); }

  const std::vector<Index>& row_indices() const { return row_; }
  const std::vector<Index>& col_indices() const { return col_; }
  IndexPair entry(Index l) const { return {row_[l], col_[l]}; }
  std::vector<IndexPair> entries() const;

  /// Number of observed entries in each row / column.
  std::vector<Index> row_counts() const;
  std::vector<Index> col_counts() const;

  bool operator==(const SamplingPattern& other) const;

 private:
  Index d1_;
  Index d2_;
  std::vector<Index> row_;
  std::vector<Index> col_;
};

using PatternPtr = std::shared_ptr<const SamplingPattern>;

/// Observed values y = P_Omega(X) aligned with a sampling pattern.
class ObservationSet {
 public:
  ObservationSet(PatternPtr pattern, Eigen::VectorXd values);

  /// Builds the canonical (sorted) layout from an arbitrary entry order;
  /// values are permuted along with their entries.
  static ObservationSet from_entries(Index d1, Index d2,
                                     const std::vector<IndexPair>& entries,
                                     const Eigen::VectorXd& values);

  const PatternPtr& pattern() const { return pattern_; }
  const Eigen::VectorXd& values() const { return values_; }
  Index rows() const { return pattern_->rows(); }
  Index cols() const { return pattern_->cols(); }
  Index size() const { return pattern_->size(); }

 private:
  PatternPtr pattern_;
  Eigen::VectorXd values_;
};

}  // namespace mirls
