#include "mirls/observation.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "mirls/errors.hpp"

namespace mirls {

namespace {

void check_entries(Index d1, Index d2, const std::vector<IndexPair>& e) {
  if (d1 <= 0 || d2 <= 0) throw DimensionError("sampling pattern needs positive dimensions");
  for (const auto& p : e) {
    if (p.row < 0 || p.row >= d1 || p.col < 0 || p.col >= d2) {
      throw DimensionError("index (" + std::to_string(p.row) + "," + std::to_string(p.col) +
                           ") outside " + std::to_string(d1) + "x" + std::to_string(d2));
    }
  }
}

}  // namespace

SamplingPattern::SamplingPattern(Index d1, Index d2, std::vector<IndexPair> entries)
    : d1_(d1), d2_(d2) {
  check_entries(d1, d2, entries);
  std::sort(entries.begin(), entries.end());
  if (std::adjacent_find(entries.begin(), entries.end()) != entries.end()) {
    throw std::invalid_argument("sampling pattern contains duplicate entries");
  }
  row_.reserve(entries.size());
  col_.reserve(entries.size());
  for (const auto& p : entries) {
    row_.push_back(p.row);
    col_.push_back(p.col);
  }
}

std::vector<IndexPair> SamplingPattern::entries() const {
  std::vector<IndexPair> out(row_.size());
  for (std::size_t l = 0; l < row_.size(); ++l) out[l] = {row_[l], col_[l]};
  return out;
}

std::vector<Index> SamplingPattern::row_counts() const {
  std::vector<Index> c(static_cast<std::size_t>(d1_), 0);
  for (Index i : row_) ++c[static_cast<std::size_t>(i)];
  return c;
}

std::vector<Index> SamplingPattern::col_counts() const {
  std::vector<Index> c(static_cast<std::size_t>(d2_), 0);
  for (Index j : col_) ++c[static_cast<std::size_t>(j)];
  return c;
}

bool SamplingPattern::operator==(const SamplingPattern& other) const {
  return d1_ == other.d1_ && d2_ == other.d2_ && row_ == other.row_ && col_ == other.col_;
}

ObservationSet::ObservationSet(PatternPtr pattern, Eigen::VectorXd values)
    : pattern_(std::move(pattern)), values_(std::move(values)) {
  if (!pattern_) throw std::invalid_argument("observation set needs a sampling pattern");
  if (values_.size() != pattern_->size()) {
    throw DimensionError("observation set: " + std::to_string(values_.size()) + " values for " +
                         std::to_string(pattern_->size()) + " entries");
  }
}

ObservationSet ObservationSet::from_entries(Index d1, Index d2,
                                            const std::vector<IndexPair>& entries,
                                            const Eigen::VectorXd& values) {
  if (static_cast<Index>(entries.size()) != values.size()) {
    throw DimensionError("entries and values differ in length");
  }
  std::vector<std::size_t> perm(entries.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::sort(perm.begin(), perm.end(),
            [&](std::size_t a, std::size_t b) { return entries[a] < entries[b]; });
  std::vector<IndexPair> sorted(entries.size());
  Eigen::VectorXd v(values.size());
  for (std::size_t l = 0; l < perm.size(); ++l) {
    sorted[l] = entries[perm[l]];
    v[static_cast<Index>(l)] = values[static_cast<Index>(perm[l])];
  }
  auto pattern = std::make_shared<const SamplingPattern>(d1, d2, std::move(sorted));
  return ObservationSet(std::move(pattern), std::move(v));
}

}  // namespace mirls
