#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mapsel {

// A model is a subset of the p candidate predictors, kept as a strictly
// increasing list of 0-based column indices.  This is the support of the
// indicator vector d in the hierarchical prior.
class ModelIndicator {
 public:
  ModelIndicator() = default;

  explicit ModelIndicator(std::vector<int> indices) : idx_(std::move(indices)) {
    std::sort(idx_.begin(), idx_.end());
    if (!idx_.empty() && idx_.front() < 0)
      throw std::invalid_argument("ModelIndicator: negative index");
    if (std::adjacent_find(idx_.begin(), idx_.end()) != idx_.end())
      throw std::invalid_argument("ModelIndicator: duplicate index");
  }

  static ModelIndicator from_mask(const std::vector<std::uint8_t>& mask) {
    std::vector<int> idx;
    for (int j = 0; j < int(mask.size()); ++j)
      if (mask[j]) idx.push_back(j);
    ModelIndicator m;
    m.idx_ = std::move(idx);  // already sorted and unique
    return m;
  }

  int size() const { return int(idx_.size()); }
  bool empty() const { return idx_.empty(); }
  const std::vector<int>& indices() const { return idx_; }

  bool contains(int j) const {
    return std::binary_search(idx_.begin(), idx_.end(), j);
  }

  std::vector<std::uint8_t> mask(int p) const {
    if (!idx_.empty() && idx_.back() >= p)
      throw std::invalid_argument("ModelIndicator: index out of range for mask");
    std::vector<std::uint8_t> m(p, 0);
    for (int j : idx_) m[j] = 1;
    return m;
  }

  ModelIndicator with(int j) const {
    if (contains(j)) throw std::invalid_argument("ModelIndicator: index already present");
    ModelIndicator m = *this;
    m.idx_.insert(std::upper_bound(m.idx_.begin(), m.idx_.end(), j), j);
    return m;
  }

  ModelIndicator without(int j) const {
    if (!contains(j)) throw std::invalid_argument("ModelIndicator: index not present");
    ModelIndicator m = *this;
    m.idx_.erase(std::lower_bound(m.idx_.begin(), m.idx_.end(), j));
    return m;
  }

  // canonical key, e.g. "" (null model), "0,3,7"
  std::string key() const {
    std::string s;
    for (std::size_t i = 0; i < idx_.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(idx_[i]);
    }
    return s;
  }

  friend bool operator==(const ModelIndicator& a, const ModelIndicator& b) = default;

 private:
  std::vector<int> idx_;
};

// Parsimony-first order used to break criterion ties deterministically:
// smaller model wins, then the lexicographically smaller index list.
inline bool tie_break_less(const ModelIndicator& a, const ModelIndicator& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a.indices() < b.indices();
}

}  // namespace mapsel
