#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

namespace topoprune {

// Union-find with path halving and union by size.
class UnionFind {
public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1), components_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t root(std::size_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }

  bool connected(std::size_t a, std::size_t b) { return root(a) == root(b); }

  /// Merges the two sets; returns false if already joined.
  bool unite(std::size_t a, std::size_t b) {
    std::size_t ra = root(a), rb = root(b);
    if (ra == rb) return false;
    if (size_[ra] < size_[rb]) std::swap(ra, rb);
    parent_[rb] = ra;
    size_[ra] += size_[rb];
    --components_;
    return true;
  }

  std::size_t components() const { return components_; }

private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
  std::size_t components_;
};

} // namespace topoprune
