#pragma once

#include <algorithm>
#include <map>
#include <optional>

#include "sheaflens/field.hpp"
#include "sheaflens/filtration.hpp"
#include "sheaflens/linalg.hpp"

namespace sheaflens {

// Abstract simplicial complex with a fixed total vertex order.  Doubles as
// the nerve of a cover (vertex ids = cover member open ids) and as a Cech
// complex over a point cloud (vertex ids = point indices).
struct Nerve {
  std::vector<int> vertex_ids;                        // external labels, sorted
  std::vector<std::vector<std::vector<int>>> simplices;  // [dim][k] = vertex positions, sorted
  int max_dim = -1;

  int dim_count(int d) const {
    return d < static_cast<int>(simplices.size()) ? static_cast<int>(simplices[d].size()) : 0;
  }
  std::optional<int> index_of(int d, const std::vector<int>& simplex) const;
};

// Nerve of a cover: k-simplices are (k+1)-subsets with nonempty intersection.
// max_dim < 0 builds every dimension (capped at |cover| - 1).
Nerve nerve(const PartialCover& cover, int max_dim = -1);

// Simplicial coboundary C^d -> C^{d+1} with alternating signs.
template <class F>
Mat<F> coboundary(const Nerve& nv, int d) {
  Mat<F> m(nv.dim_count(d + 1), nv.dim_count(d));
  for (int row = 0; row < nv.dim_count(d + 1); ++row) {
    const auto& s = nv.simplices[d + 1][row];
    F sign = F::one();
    for (std::size_t drop = 0; drop < s.size(); ++drop) {
      std::vector<int> face;
      face.reserve(s.size() - 1);
      for (std::size_t i = 0; i < s.size(); ++i)
        if (i != drop) face.push_back(s[i]);
      auto col = nv.index_of(d, face);
      if (col) m.at(row, *col) = m.at(row, *col) + sign;
      sign = -sign;
    }
  }
  return m;
}

// Cohomology of a complex with chosen cocycle bases, supporting coordinate
// computations for induced maps.
template <class F>
struct Cohomology {
  Nerve complex;
  std::vector<int> ranks;                       // per degree 0..degree_cap
  std::vector<std::vector<std::vector<F>>> basis;  // [deg][k] = cocycle vector
  std::vector<Mat<F>> solve_matrix;             // [deg]: columns = im(delta) basis | H basis
  std::vector<int> im_rank;                     // columns of the image part

  int rank(int deg) const { return deg < static_cast<int>(ranks.size()) ? ranks[deg] : 0; }

  // Coordinates of a cocycle in the chosen H basis (mod coboundaries).
  std::vector<F> coordinates(int deg, const std::vector<F>& cocycle) const {
    const Mat<F>& m = solve_matrix[deg];
    auto x = solve(m, cocycle);
    if (!x) fail(ErrorCode::non_composable, "vector is not a cocycle of this complex");
    std::vector<F> coords(ranks[deg], F::zero());
    for (int i = 0; i < ranks[deg]; ++i) coords[i] = (*x)[im_rank[deg] + i];
    return coords;
  }
};

template <class F>
Cohomology<F> cohomology_of_complex(Nerve nv, int degree_cap) {
  Cohomology<F> res;
  res.complex = std::move(nv);
  for (int deg = 0; deg <= degree_cap; ++deg) {
    int n = res.complex.dim_count(deg);
    Mat<F> delta = coboundary<F>(res.complex, deg);
    std::vector<std::vector<F>> kernel = nullspace(delta);

    // Image of the previous coboundary, as independent columns.
    std::vector<std::vector<F>> image;
    if (deg > 0) {
      Mat<F> prev = coboundary<F>(res.complex, deg - 1);
      Mat<F> probe(n, 0);
      for (int j = 0; j < prev.cols; ++j) {
        std::vector<F> col(n);
        for (int i = 0; i < n; ++i) col[i] = prev.at(i, j);
        Mat<F> next(n, probe.cols + 1);
        for (int i = 0; i < n; ++i) {
          for (int c = 0; c < probe.cols; ++c) next.at(i, c) = probe.at(i, c);
          next.at(i, probe.cols) = col[i];
        }
        if (rank(next) > probe.cols) {
          probe = std::move(next);
          image.push_back(col);
        }
      }
    }

    // Extend the image basis to all cocycles; the added columns represent H.
    Mat<F> acc(n, static_cast<int>(image.size()));
    for (std::size_t c = 0; c < image.size(); ++c)
      for (int i = 0; i < n; ++i) acc.at(i, static_cast<int>(c)) = image[c][i];
    std::vector<std::vector<F>> hbasis;
    for (const auto& z : kernel) {
      Mat<F> next(n, acc.cols + 1);
      for (int i = 0; i < n; ++i) {
        for (int c = 0; c < acc.cols; ++c) next.at(i, c) = acc.at(i, c);
        next.at(i, acc.cols) = z[i];
      }
      if (rank(next) > acc.cols) {
        acc = std::move(next);
        hbasis.push_back(z);
      }
    }

    res.im_rank.push_back(static_cast<int>(image.size()));
    res.ranks.push_back(static_cast<int>(hbasis.size()));
    res.basis.push_back(std::move(hbasis));
    res.solve_matrix.push_back(std::move(acc));
  }
  return res;
}

template <class F>
Cohomology<F> cech_cohomology(const PartialCover& cover, int degree_cap) {
  return cohomology_of_complex<F>(nerve(cover, degree_cap + 1), degree_cap);
}

// Lexicographically least refinement function; members of fine mapped to a
// containing member of coarse.
std::vector<int> least_refinement_function(const PartialCover& fine, const PartialCover& coarse);

template <class F>
struct Cohomology;

template <class F>
std::vector<Mat<F>> refinement_map_on(const Cohomology<F>& fine_h, const Cohomology<F>& coarse_h,
                                      const std::vector<int>& tau_members, int degree_cap);

// Pullback of a cochain along tau (vertex positions fine -> coarse).
template <class F>
std::vector<F> pullback_cochain(const Nerve& fine, const Nerve& coarse, int deg,
                                const std::vector<int>& tau_pos, const std::vector<F>& cochain) {
  std::vector<F> out(fine.dim_count(deg), F::zero());
  for (int k = 0; k < fine.dim_count(deg); ++k) {
    std::vector<int> image;
    image.reserve(deg + 1);
    for (int v : fine.simplices[deg][k]) image.push_back(tau_pos[v]);
    std::vector<int> sorted = image;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) continue;  // degenerate
    // Sign of the permutation sorting the image tuple.
    int inversions = 0;
    for (std::size_t i = 0; i < image.size(); ++i)
      for (std::size_t j = i + 1; j < image.size(); ++j)
        if (image[i] > image[j]) ++inversions;
    auto idx = coarse.index_of(deg, sorted);
    if (!idx) fail(ErrorCode::invalid_tau, "image simplex missing from the coarse nerve");
    F v = cochain[*idx];
    if (inversions % 2) v = -v;
    out[k] = v;
  }
  return out;
}

// Induced maps H^deg(coarse) -> H^deg(fine) for deg = 0..degree_cap, in the
// chosen bases.  tau, when given, is indexed by fine cover members.
template <class F>
std::vector<Mat<F>> refinement_map(const PartialCover& fine, const PartialCover& coarse,
                                   std::optional<std::vector<int>> tau, int degree_cap) {
  if (!refines(fine, coarse))
    fail(ErrorCode::not_a_refinement, "fine cover does not refine the coarse cover");
  std::vector<int> tau_members = tau ? *tau : least_refinement_function(fine, coarse);
  if (tau_members.size() != fine.members.size())
    fail(ErrorCode::invalid_tau, "tau must assign a coarse member to every fine member");
  for (std::size_t i = 0; i < fine.members.size(); ++i) {
    bool listed = std::find(coarse.members.begin(), coarse.members.end(), tau_members[i]) !=
                  coarse.members.end();
    if (!listed || !fine.space->open_subset(fine.members[i], tau_members[i]))
      fail(ErrorCode::invalid_tau,
           "tau violates containment at " + fine.space->open_label(fine.members[i]));
  }

  Cohomology<F> cf = cech_cohomology<F>(fine, degree_cap);
  Cohomology<F> cc = cech_cohomology<F>(coarse, degree_cap);
  return refinement_map_on(cf, cc, tau_members, degree_cap);
}

// Same, but against precomputed cohomologies (used by the persistence
// pipeline so bases stay consistent along the filtration).
template <class F>
std::vector<Mat<F>> refinement_map_on(const Cohomology<F>& fine_h, const Cohomology<F>& coarse_h,
                                      const std::vector<int>& tau_members, int degree_cap) {
  // Translate tau to vertex positions of the two nerves.
  std::vector<int> tau_pos(fine_h.complex.vertex_ids.size());
  for (std::size_t i = 0; i < tau_pos.size(); ++i) {
    int target = tau_members[i];
    auto it = std::lower_bound(coarse_h.complex.vertex_ids.begin(),
                               coarse_h.complex.vertex_ids.end(), target);
    tau_pos[i] = static_cast<int>(it - coarse_h.complex.vertex_ids.begin());
  }
  std::vector<Mat<F>> maps;
  for (int deg = 0; deg <= degree_cap; ++deg) {
    Mat<F> m(fine_h.rank(deg), coarse_h.rank(deg));
    for (int j = 0; j < coarse_h.rank(deg); ++j) {
      std::vector<F> pulled = pullback_cochain(fine_h.complex, coarse_h.complex, deg, tau_pos,
                                               coarse_h.basis[deg][j]);
      std::vector<F> coords = fine_h.coordinates(deg, pulled);
      for (int i = 0; i < fine_h.rank(deg); ++i) m.at(i, j) = coords[i];
    }
    maps.push_back(std::move(m));
  }
  return maps;
}

// Persistence module of Cech cohomology along a coarsening filtration.
// maps[i][deg] sends H^deg(cover[i+1]) to H^deg(cover[i]); the module runs
// opposite to the threshold direction.
template <class F>
struct PersistenceModule {
  std::vector<double> index_values;         // cover left endpoints: 0, t_1, ..., t_k
  std::vector<std::vector<int>> dims;       // [index][deg]
  std::vector<std::vector<Mat<F>>> maps;    // [index i < k][deg]
  int degree_cap = 0;
};

template <class F>
PersistenceModule<F> persistence_module_from_filtration(const CoarseningFiltration& filt,
                                                        int degree_cap) {
  PersistenceModule<F> mod;
  mod.degree_cap = degree_cap;
  mod.index_values.push_back(0.0);
  for (double t : filt.breakpoints) mod.index_values.push_back(t);

  std::vector<Cohomology<F>> hs;
  for (const auto& cover : filt.covers) {
    hs.push_back(cech_cohomology<F>(cover, degree_cap));
    std::vector<int> d;
    for (int deg = 0; deg <= degree_cap; ++deg) d.push_back(hs.back().rank(deg));
    mod.dims.push_back(std::move(d));
  }
  for (std::size_t i = 0; i + 1 < filt.covers.size(); ++i) {
    std::vector<int> tau = least_refinement_function(filt.covers[i], filt.covers[i + 1]);
    mod.maps.push_back(refinement_map_on(hs[i], hs[i + 1], tau, degree_cap));
  }
  return mod;
}

struct PersistenceBar {
  int degree = 0;
  double birth = 0.0;
  double death = 0.0;  // +inf for essential classes
  int multiplicity = 1;
};

struct PersistenceDiagram {
  std::vector<PersistenceBar> bars;  // sorted by (degree, birth, death)

  std::vector<PersistenceBar> degree_bars(int degree) const;
};

// Interval decomposition via composite ranks.  The module is reversed so
// maps run with increasing indices, and bars are reported back in the
// original threshold coordinates; a class alive through the last cover gets
// death +inf.
template <class F>
PersistenceDiagram barcode(const PersistenceModule<F>& mod) {
  const int k = static_cast<int>(mod.index_values.size()) - 1;  // last position
  for (int i = 0; i < k; ++i)
    for (int deg = 0; deg <= mod.degree_cap; ++deg)
      if (mod.maps[i][deg].rows != mod.dims[i][deg] || mod.maps[i][deg].cols != mod.dims[i + 1][deg])
        fail(ErrorCode::non_composable, "module maps do not chain");

  PersistenceDiagram out;
  for (int deg = 0; deg <= mod.degree_cap; ++deg) {
    // Reversed module W_j = H(cover[k - j]); maps W_j -> W_{j+1}.
    auto dim_w = [&](int j) { return mod.dims[k - j][deg]; };
    auto map_w = [&](int j) { return mod.maps[k - j - 1][deg]; };  // W_j -> W_{j+1}

    // r[i][j] = rank of the composite W_i -> W_j, i <= j.
    std::vector<std::vector<int>> r(k + 1, std::vector<int>(k + 1, 0));
    for (int i = 0; i <= k; ++i) {
      Mat<F> acc = Mat<F>::identity(dim_w(i));
      r[i][i] = dim_w(i);
      for (int j = i + 1; j <= k; ++j) {
        acc = matmul(map_w(j - 1), acc);
        r[i][j] = rank(acc);
      }
    }
    auto rank_at = [&](int i, int j) {
      if (i < 0 || j > k) return 0;
      return r[i][j];
    };
    for (int i = 0; i <= k; ++i)
      for (int j = i; j <= k; ++j) {
        int mult = rank_at(i, j) - rank_at(i - 1, j) - rank_at(i, j + 1) + rank_at(i - 1, j + 1);
        if (mult < 0) fail(ErrorCode::non_composable, "negative interval multiplicity");
        if (mult == 0) continue;
        // W positions [i, j] correspond to covers k-j .. k-i.
        int first_cover = k - j, last_cover = k - i;
        double birth = mod.index_values[first_cover];
        double death = last_cover == k ? std::numeric_limits<double>::infinity()
                                       : mod.index_values[last_cover + 1];
        out.bars.push_back({deg, birth, death, mult});
      }
  }
  std::sort(out.bars.begin(), out.bars.end(), [](const PersistenceBar& a, const PersistenceBar& b) {
    if (a.degree != b.degree) return a.degree < b.degree;
    if (a.birth != b.birth) return a.birth < b.birth;
    return a.death < b.death;
  });
  return out;
}

// Exact bottleneck distance between the bars of one degree; infinite bars
// match only infinite bars.
double bottleneck_degree(const PersistenceDiagram& d1, const PersistenceDiagram& d2, int degree);

// Max over all degrees present in either diagram.
double bottleneck(const PersistenceDiagram& d1, const PersistenceDiagram& d2);

bool diagrams_equal(const PersistenceDiagram& d1, const PersistenceDiagram& d2, double tol);

}  // namespace sheaflens
