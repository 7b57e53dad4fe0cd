#include "sheaflens/cech.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace sheaflens {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::optional<int> Nerve::index_of(int d, const std::vector<int>& simplex) const {
  if (d >= static_cast<int>(simplices.size())) return std::nullopt;
  const auto& level = simplices[d];
  auto it = std::lower_bound(level.begin(), level.end(), simplex);
  if (it == level.end() || *it != simplex) return std::nullopt;
  return static_cast<int>(it - level.begin());
}

Nerve nerve(const PartialCover& cover, int max_dim) {
  Nerve nv;
  nv.vertex_ids = cover.members;  // already sorted unique
  const int n = static_cast<int>(nv.vertex_ids.size());
  int cap = max_dim < 0 ? n - 1 : std::min(max_dim, n - 1);
  if (n == 0) {
    nv.max_dim = -1;
    return nv;
  }
  nv.simplices.assign(cap + 1, {});
  for (int v = 0; v < n; ++v) nv.simplices[0].push_back({v});

  // Extend simplices one vertex at a time; empty intersections prune all
  // of their cofaces.
  std::vector<std::pair<std::vector<int>, PointSet>> frontier;
  for (int v = 0; v < n; ++v)
    frontier.push_back({{v}, cover.space->open_members(nv.vertex_ids[v])});
  for (int d = 1; d <= cap; ++d) {
    std::vector<std::pair<std::vector<int>, PointSet>> next;
    for (const auto& [simplex, inter] : frontier) {
      for (int v = simplex.back() + 1; v < n; ++v) {
        PointSet meet = inter.intersect_with(cover.space->open_members(nv.vertex_ids[v]));
        if (meet.empty()) continue;
        std::vector<int> bigger = simplex;
        bigger.push_back(v);
        nv.simplices[d].push_back(bigger);
        next.push_back({std::move(bigger), std::move(meet)});
      }
    }
    frontier = std::move(next);
    if (frontier.empty()) break;
  }
  while (!nv.simplices.empty() && nv.simplices.back().empty()) nv.simplices.pop_back();
  nv.max_dim = static_cast<int>(nv.simplices.size()) - 1;
  return nv;
}

std::vector<int> least_refinement_function(const PartialCover& fine, const PartialCover& coarse) {
  if (!refines(fine, coarse))
    fail(ErrorCode::not_a_refinement, "fine cover does not refine the coarse cover");
  std::vector<int> tau;
  for (int v : fine.members) {
    int pick = -1;
    for (int u : coarse.members)
      if (fine.space->open_subset(v, u)) {
        pick = u;
        break;
      }
    tau.push_back(pick);
  }
  return tau;
}

std::vector<PersistenceBar> PersistenceDiagram::degree_bars(int degree) const {
  std::vector<PersistenceBar> out;
  for (const auto& b : bars)
    if (b.degree == degree) out.push_back(b);
  return out;
}

namespace {

struct Point2 {
  double b, d;
};

// Perfect matching feasibility at threshold lambda in the diagonal-augmented
// bipartite graph: left = a-points plus one diagonal slot per b-point, right
// = b-points plus one diagonal slot per a-point.
bool matchable(const std::vector<Point2>& a, const std::vector<Point2>& b, double lambda) {
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  const int left = n + m, right = m + n;
  auto cost = [&](int i, int j) {
    return std::max(std::fabs(a[i].b - b[j].b), std::fabs(a[i].d - b[j].d));
  };
  auto edge = [&](int l, int r) {
    if (l < n && r < m) return cost(l, r) <= lambda;
    if (l < n) return r - m == l && (a[l].d - a[l].b) / 2.0 <= lambda;  // a_i to its diagonal
    if (r < m) return l - n == r && (b[r].d - b[r].b) / 2.0 <= lambda;  // diagonal to b_j
    return true;  // diagonal to diagonal
  };

  std::vector<int> match_r(right, -1);
  std::vector<char> visited(right, 0);
  std::function<bool(int)> augment = [&](int l) -> bool {
    for (int r = 0; r < right; ++r) {
      if (visited[r] || !edge(l, r)) continue;
      visited[r] = 1;
      if (match_r[r] < 0 || augment(match_r[r])) {
        match_r[r] = l;
        return true;
      }
    }
    return false;
  };
  int matched = 0;
  for (int l = 0; l < left; ++l) {
    std::fill(visited.begin(), visited.end(), 0);
    if (augment(l)) ++matched;
  }
  return matched == left;
}

}  // namespace

double bottleneck_degree(const PersistenceDiagram& d1, const PersistenceDiagram& d2, int degree) {
  std::vector<Point2> fin1, fin2;
  std::vector<double> inf1, inf2;
  for (const auto& bar : d1.degree_bars(degree))
    for (int c = 0; c < bar.multiplicity; ++c)
      std::isinf(bar.death) ? inf1.push_back(bar.birth) : (void)fin1.push_back({bar.birth, bar.death});
  for (const auto& bar : d2.degree_bars(degree))
    for (int c = 0; c < bar.multiplicity; ++c)
      std::isinf(bar.death) ? inf2.push_back(bar.birth) : (void)fin2.push_back({bar.birth, bar.death});

  if (inf1.size() != inf2.size())
    fail(ErrorCode::infinite_mismatch, "diagrams carry different numbers of infinite bars");
  double essential = 0.0;
  std::sort(inf1.begin(), inf1.end());
  std::sort(inf2.begin(), inf2.end());
  for (std::size_t i = 0; i < inf1.size(); ++i)
    essential = std::max(essential, std::fabs(inf1[i] - inf2[i]));

  std::vector<double> candidates{0.0};
  for (const auto& p : fin1) candidates.push_back((p.d - p.b) / 2.0);
  for (const auto& q : fin2) candidates.push_back((q.d - q.b) / 2.0);
  for (const auto& p : fin1)
    for (const auto& q : fin2)
      candidates.push_back(std::max(std::fabs(p.b - q.b), std::fabs(p.d - q.d)));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  // Binary search the smallest feasible candidate.
  int lo = 0, hi = static_cast<int>(candidates.size()) - 1;
  if (!matchable(fin1, fin2, candidates[hi])) return kInf;  // cannot happen: max always feasible
  while (lo < hi) {
    int mid = (lo + hi) / 2;
    if (matchable(fin1, fin2, candidates[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return std::max(essential, candidates[lo]);
}

double bottleneck(const PersistenceDiagram& d1, const PersistenceDiagram& d2) {
  int top = -1;
  for (const auto& b : d1.bars) top = std::max(top, b.degree);
  for (const auto& b : d2.bars) top = std::max(top, b.degree);
  double acc = 0.0;
  for (int deg = 0; deg <= top; ++deg) acc = std::max(acc, bottleneck_degree(d1, d2, deg));
  return acc;
}

bool diagrams_equal(const PersistenceDiagram& d1, const PersistenceDiagram& d2, double tol) {
  auto expand = [](const PersistenceDiagram& d) {
    std::vector<PersistenceBar> out;
    for (const auto& b : d.bars)
      for (int c = 0; c < b.multiplicity; ++c) out.push_back({b.degree, b.birth, b.death, 1});
    return out;
  };
  std::vector<PersistenceBar> e1 = expand(d1), e2 = expand(d2);
  if (e1.size() != e2.size()) return false;
  for (std::size_t i = 0; i < e1.size(); ++i) {
    if (e1[i].degree != e2[i].degree) return false;
    if (std::isinf(e1[i].death) != std::isinf(e2[i].death)) return false;
    if (std::fabs(e1[i].birth - e2[i].birth) > tol) return false;
    if (!std::isinf(e1[i].death) && std::fabs(e1[i].death - e2[i].death) > tol) return false;
  }
  return true;
}

}  // namespace sheaflens
