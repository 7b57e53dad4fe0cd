#pragma once

#include <cstdint>
#include <vector>

namespace sheaflens {

// Subset of the points of a FiniteSpace, as a packed bitset.  Points are
// dense indices 0..n-1; all PointSets over one space share the same width.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(int universe_size)
      : size_(universe_size), words_((universe_size + 63) / 64, 0) {}

  int universe_size() const { return size_; }

  void insert(int i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void erase(int i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  bool contains(int i) const { return (words_[i >> 6] >> (i & 63)) & 1; }

  bool empty() const {
    for (auto w : words_)
      if (w) return false;
    return true;
  }

  int count() const;

  bool subset_of(const PointSet& other) const {
    for (std::size_t k = 0; k < words_.size(); ++k)
      if (words_[k] & ~other.words_[k]) return false;
    return true;
  }

  PointSet union_with(const PointSet& other) const {
    PointSet r = *this;
    for (std::size_t k = 0; k < words_.size(); ++k) r.words_[k] |= other.words_[k];
    return r;
  }

  PointSet intersect_with(const PointSet& other) const {
    PointSet r = *this;
    for (std::size_t k = 0; k < words_.size(); ++k) r.words_[k] &= other.words_[k];
    return r;
  }

  std::vector<int> elements() const;

  friend bool operator==(const PointSet& a, const PointSet& b) {
    return a.size_ == b.size_ && a.words_ == b.words_;
  }
  friend bool operator<(const PointSet& a, const PointSet& b) {
    return a.words_ < b.words_;
  }

  std::size_t hash() const {
    std::size_t h = 1469598103934665603ull;
    for (auto w : words_) {
      h ^= w;
      h *= 1099511628211ull;
    }
    return h;
  }

 private:
  int size_ = 0;
  std::vector<std::uint64_t> words_;
};

struct PointSetHash {
  std::size_t operator()(const PointSet& s) const { return s.hash(); }
};

}  // namespace sheaflens
