#pragma once

#include <cassert>
#include <optional>
#include <vector>

namespace sheaflens {

// Dense matrix over an exact field (F2 or Rat).  Everything downstream of the
// cochain complexes runs through the elimination routines here.
template <class F>
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<F> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, F::zero()) {}

  F& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  const F& at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = F::one();
    return m;
  }

  friend bool operator==(const Mat& x, const Mat& y) {
    return x.rows == y.rows && x.cols == y.cols && x.a == y.a;
  }
};

template <class F>
Mat<F> matmul(const Mat<F>& x, const Mat<F>& y) {
  assert(x.cols == y.rows);
  Mat<F> r(x.rows, y.cols);
  for (int i = 0; i < x.rows; ++i)
    for (int k = 0; k < x.cols; ++k) {
      const F& v = x.at(i, k);
      if (v.is_zero()) continue;
      for (int j = 0; j < y.cols; ++j) r.at(i, j) = r.at(i, j) + v * y.at(k, j);
    }
  return r;
}

template <class F>
std::vector<F> matvec(const Mat<F>& x, const std::vector<F>& v) {
  assert(static_cast<int>(v.size()) == x.cols);
  std::vector<F> r(x.rows, F::zero());
  for (int i = 0; i < x.rows; ++i)
    for (int j = 0; j < x.cols; ++j)
      if (!x.at(i, j).is_zero()) r[i] = r[i] + x.at(i, j) * v[j];
  return r;
}

// Row-reduces in place; returns pivot column per eliminated row.
template <class F>
std::vector<int> row_reduce(Mat<F>& m) {
  std::vector<int> pivots;
  int row = 0;
  for (int col = 0; col < m.cols && row < m.rows; ++col) {
    int p = -1;
    for (int i = row; i < m.rows; ++i)
      if (!m.at(i, col).is_zero()) {
        p = i;
        break;
      }
    if (p < 0) continue;
    for (int j = 0; j < m.cols; ++j) std::swap(m.at(p, j), m.at(row, j));
    F inv = m.at(row, col).inverse();
    for (int j = col; j < m.cols; ++j) m.at(row, j) = m.at(row, j) * inv;
    for (int i = 0; i < m.rows; ++i) {
      if (i == row || m.at(i, col).is_zero()) continue;
      F f = m.at(i, col);
      for (int j = col; j < m.cols; ++j) m.at(i, j) = m.at(i, j) - f * m.at(row, j);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

template <class F>
int rank(Mat<F> m) {
  return static_cast<int>(row_reduce(m).size());
}

// Basis of the right nullspace, one column vector per basis element.
template <class F>
std::vector<std::vector<F>> nullspace(Mat<F> m) {
  std::vector<int> pivots = row_reduce(m);
  std::vector<bool> is_pivot(m.cols, false);
  for (int c : pivots) is_pivot[c] = true;
  std::vector<std::vector<F>> basis;
  for (int free = 0; free < m.cols; ++free) {
    if (is_pivot[free]) continue;
    std::vector<F> v(m.cols, F::zero());
    v[free] = F::one();
    for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -m.at(static_cast<int>(r), free);
    basis.push_back(std::move(v));
  }
  return basis;
}

// Solves A x = b; returns nullopt when inconsistent.  Free variables are set
// to zero, so the solution is deterministic.
template <class F>
std::optional<std::vector<F>> solve(const Mat<F>& a, const std::vector<F>& b) {
  assert(static_cast<int>(b.size()) == a.rows);
  Mat<F> aug(a.rows, a.cols + 1);
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < a.cols; ++j) aug.at(i, j) = a.at(i, j);
    aug.at(i, a.cols) = b[i];
  }
  std::vector<int> pivots = row_reduce(aug);
  if (!pivots.empty() && pivots.back() == a.cols) return std::nullopt;
  std::vector<F> x(a.cols, F::zero());
  for (std::size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = aug.at(static_cast<int>(r), a.cols);
  return x;
}

}  // namespace sheaflens
