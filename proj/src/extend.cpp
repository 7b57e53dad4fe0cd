#include "sheaflens/extend.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>

namespace sheaflens {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Term {
  int sub = -1, sup = -1;
};

struct Workspace {
  const MetricSheaf* sheaf = nullptr;
  ExtendObjective objective = ExtendObjective::linf;
  std::vector<Term> terms;
  std::vector<int> free_euclid;           // open ids, ascending
  std::vector<int> euclid_offset;         // open id -> offset into z, or -1
  std::vector<int> euclid_dim;            // open id -> dim (free euclid only)
  int total_dim = 0;
  std::vector<int> free_table;            // open ids, ascending
  std::vector<StalkValue> fixed;          // supported / forced values (empty optional -> free)
  std::vector<char> is_free;

  StalkValue value_of(int id, const std::vector<double>& z, const std::vector<int>& tables) const {
    if (!is_free[id]) return fixed[id];
    if (euclid_offset[id] >= 0) {
      std::vector<double> v(euclid_dim[id]);
      for (int k = 0; k < euclid_dim[id]; ++k) v[k] = z[euclid_offset[id] + k];
      return v;
    }
    for (std::size_t t = 0; t < free_table.size(); ++t)
      if (free_table[t] == id) return tables[t];
    return std::monostate{};  // free one-point stalk
  }

  double term_value(const Term& t, const std::vector<double>& z,
                    const std::vector<int>& tables) const {
    const RestrictionMap& r = sheaf->restriction(t.sup, t.sub);
    return distance(sheaf->stalk(t.sub), apply_map(r, value_of(t.sup, z, tables)),
                    value_of(t.sub, z, tables));
  }

  double objective_value(const std::vector<double>& z, const std::vector<int>& tables) const {
    double acc = 0.0;
    for (const auto& t : terms) {
      double v = term_value(t, z, tables);
      if (objective == ExtendObjective::linf)
        acc = std::max(acc, v);
      else
        acc += v * v;
    }
    return objective == ExtendObjective::linf ? acc : std::sqrt(acc);
  }
};

// Subgradient of one term with respect to the free Euclidean block z.
void add_term_subgradient(const Workspace& w, const Term& t, const std::vector<double>& z,
                          const std::vector<int>& tables, double scale, std::vector<double>* g) {
  const PseudometricSpace& stalk_u = w.sheaf->stalk(t.sub);
  const auto* eu = std::get_if<EuclideanSpace>(&stalk_u);
  if (!eu) return;  // table terms carry no gradient
  const RestrictionMap& r = w.sheaf->restriction(t.sup, t.sub);
  const auto* lin = std::get_if<LinearMap>(&r.body);
  if (!lin) return;

  StalkValue val_v = w.value_of(t.sup, z, tables);
  StalkValue val_u = w.value_of(t.sub, z, tables);
  const auto& xv = std::get<std::vector<double>>(val_v);
  const auto& xu = std::get<std::vector<double>>(val_u);
  std::vector<double> diff(eu->dim, 0.0);
  for (int i = 0; i < eu->dim; ++i) {
    double ri = 0.0;
    for (int j = 0; j < lin->cols; ++j) ri += lin->at(i, j) * xv[j];
    diff[i] = ri - xu[i];
  }

  int off_v = w.euclid_offset[t.sup];
  int off_u = w.euclid_offset[t.sub];
  if (eu->metric == Metric::linf) {
    int arg = 0;
    for (int i = 1; i < eu->dim; ++i)
      if (std::fabs(diff[i]) > std::fabs(diff[arg])) arg = i;
    if (diff[arg] == 0.0) return;
    double s = diff[arg] > 0 ? scale : -scale;
    if (off_v >= 0)
      for (int j = 0; j < lin->cols; ++j) (*g)[off_v + j] += s * lin->at(arg, j);
    if (off_u >= 0) (*g)[off_u + arg] -= s;
  } else {
    double norm = 0.0;
    for (double d : diff) norm += d * d;
    norm = std::sqrt(norm);
    if (norm == 0.0) return;
    for (int i = 0; i < eu->dim; ++i) {
      double u = scale * diff[i] / norm;
      if (off_v >= 0)
        for (int j = 0; j < lin->cols; ++j) (*g)[off_v + j] += u * lin->at(i, j);
      if (off_u >= 0) (*g)[off_u + i] -= u;
    }
  }
}

std::vector<double> subgradient(const Workspace& w, const std::vector<double>& z,
                                const std::vector<int>& tables) {
  std::vector<double> g(w.total_dim, 0.0);
  if (w.objective == ExtendObjective::linf) {
    int arg = -1;
    double best = -1.0;
    for (std::size_t i = 0; i < w.terms.size(); ++i) {
      double v = w.term_value(w.terms[i], z, tables);
      if (v > best) {
        best = v;
        arg = static_cast<int>(i);
      }
    }
    if (arg >= 0) add_term_subgradient(w, w.terms[arg], z, tables, 1.0, &g);
    return g;
  }
  double f = w.objective_value(z, tables);
  if (f == 0.0) return g;
  for (const auto& t : w.terms) {
    double v = w.term_value(t, z, tables);
    if (v > 0.0) add_term_subgradient(w, t, z, tables, v / f, &g);
  }
  return g;
}

struct StartResult {
  std::vector<double> z;
  double value = kInf;
  long iterations = 0;
  double final_step = 0.0;
  bool completed = false;
};

StartResult run_descent(const Workspace& w, std::vector<double> z, const std::vector<int>& tables,
                        double lower_bound, double tol, long budget) {
  StartResult out;
  out.z = z;
  out.value = w.objective_value(z, tables);
  if (w.total_dim == 0 || budget <= 0) {
    out.completed = true;
    return out;
  }
  double delta = std::max(tol, 0.5 * (out.value - lower_bound));
  int since_improvement = 0;
  const int window = 20;
  for (long it = 0; it < budget; ++it) {
    ++out.iterations;
    double f = w.objective_value(z, tables);
    if (f < out.value - tol * 1e-3) {
      out.value = f;
      out.z = z;
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    if (since_improvement >= window) {
      delta *= 0.5;
      since_improvement = 0;
      if (delta < tol / 8.0) {
        out.completed = true;
        break;
      }
    }
    std::vector<double> g = subgradient(w, z, tables);
    double gnorm2 = 0.0;
    for (double x : g) gnorm2 += x * x;
    if (gnorm2 == 0.0) {
      out.completed = true;
      break;
    }
    double target = std::max(lower_bound, out.value - delta);
    double step = (f - target) / gnorm2;
    if (step <= 0.0) step = delta / gnorm2;
    out.final_step = step;
    for (int i = 0; i < w.total_dim; ++i) z[i] -= step * g[i];
  }
  return out;
}

// ---- exact refinement for one-dimensional free variables ------------------

struct Interval {
  double lo = -1e18, hi = 1e18;
  bool empty() const { return lo > hi + 1e-15; }
  void clamp(double a, double b) {
    lo = std::max(lo, a);
    hi = std::min(hi, b);
  }
};

struct LinkConstraint {
  int var_u = -1, var_v = -1;  // |alpha * z_v - z_u| <= lambda
  double alpha = 0.0;
};

struct BoxConstraintRow {
  int var = -1;
  double alpha = 0.0;  // |alpha * z - c| <= lambda, one row of a fixed-target term
  double c = 0.0;
};

struct QuadConstraint {
  int var = -1;
  double a2 = 0.0, a1 = 0.0, a0 = 0.0;  // a2 z^2 + a1 z + a0 <= lambda^2
};

struct OneDimProblem {
  int n = 0;
  double const_floor = 0.0;  // max over fixed-fixed terms
  std::vector<BoxConstraintRow> boxes;
  std::vector<QuadConstraint> quads;
  std::vector<LinkConstraint> links;
};

bool build_onedim(const Workspace& w, OneDimProblem* p) {
  if (w.objective != ExtendObjective::linf) return false;
  if (!w.free_table.empty()) return false;
  for (int id : w.free_euclid)
    if (w.euclid_dim[id] != 1) return false;
  p->n = static_cast<int>(w.free_euclid.size());
  if (p->n == 0) return false;

  std::vector<int> var_of(w.euclid_offset.size(), -1);
  for (int i = 0; i < p->n; ++i) var_of[w.free_euclid[i]] = i;

  std::vector<double> zdummy(w.total_dim, 0.0);
  std::vector<int> tdummy;
  for (const auto& t : w.terms) {
    bool fu = w.is_free[t.sub], fv = w.is_free[t.sup];
    if (!fu && !fv) {
      p->const_floor = std::max(p->const_floor, w.term_value(t, zdummy, tdummy));
      continue;
    }
    const RestrictionMap& r = w.sheaf->restriction(t.sup, t.sub);
    const auto* lin = std::get_if<LinearMap>(&r.body);
    if (!lin) return false;  // free table or collapse endpoint
    const auto& stalk_u = std::get<EuclideanSpace>(w.sheaf->stalk(t.sub));
    if (fu && fv) {
      p->links.push_back({var_of[t.sub], var_of[t.sup], lin->a[0]});
    } else if (fv) {
      const auto& cu = std::get<std::vector<double>>(w.fixed[t.sub]);
      if (stalk_u.metric == Metric::linf || stalk_u.dim == 1) {
        for (int i = 0; i < stalk_u.dim; ++i)
          p->boxes.push_back({var_of[t.sup], lin->at(i, 0), cu[i]});
      } else {
        QuadConstraint q{var_of[t.sup], 0.0, 0.0, 0.0};
        for (int i = 0; i < stalk_u.dim; ++i) {
          q.a2 += lin->at(i, 0) * lin->at(i, 0);
          q.a1 += -2.0 * lin->at(i, 0) * cu[i];
          q.a0 += cu[i] * cu[i];
        }
        p->quads.push_back(q);
      }
    } else {
      // fixed source, free one-dimensional target: |w0 - z| <= lambda
      StalkValue img = apply_map(r, w.fixed[t.sup]);
      double w0 = std::get<std::vector<double>>(img)[0];
      p->boxes.push_back({var_of[t.sub], -1.0, -w0});  // |-z + w0| == |(-1)z - (-w0)|
    }
  }
  return true;
}

bool propagate(const OneDimProblem& p, double lambda, std::vector<Interval>* iv) {
  for (const auto& b : p.boxes) {
    if (b.alpha == 0.0) {
      if (std::fabs(b.c) > lambda + 1e-15) return false;
      continue;
    }
    double lo = (b.c - lambda) / b.alpha, hi = (b.c + lambda) / b.alpha;
    if (lo > hi) std::swap(lo, hi);
    (*iv)[b.var].clamp(lo, hi);
    if ((*iv)[b.var].empty()) return false;
  }
  for (const auto& q : p.quads) {
    double rhs = lambda * lambda - q.a0;
    if (q.a2 == 0.0) {
      if (q.a1 == 0.0) {
        if (rhs < -1e-15) return false;
        continue;
      }
      if (q.a1 > 0)
        (*iv)[q.var].clamp(-1e18, rhs / q.a1);
      else
        (*iv)[q.var].clamp(rhs / q.a1, 1e18);
    } else {
      double disc = q.a1 * q.a1 + 4.0 * q.a2 * rhs;
      if (disc < 0) return false;
      double s = std::sqrt(disc);
      (*iv)[q.var].clamp((-q.a1 - s) / (2 * q.a2), (-q.a1 + s) / (2 * q.a2));
    }
    if ((*iv)[q.var].empty()) return false;
  }
  for (int pass = 0; pass < 1000; ++pass) {
    bool changed = false;
    for (const auto& l : p.links) {
      Interval& u = (*iv)[l.var_u];
      Interval& v = (*iv)[l.var_v];
      double a = l.alpha * v.lo, b = l.alpha * v.hi;
      if (a > b) std::swap(a, b);
      double nlo = std::max(u.lo, a - lambda), nhi = std::min(u.hi, b + lambda);
      if (nlo > u.lo + 1e-15 || nhi < u.hi - 1e-15) changed = true;
      u.lo = nlo;
      u.hi = nhi;
      if (u.empty()) return false;
      if (l.alpha != 0.0) {
        double c = (u.lo - lambda) / l.alpha, d = (u.hi + lambda) / l.alpha;
        if (c > d) std::swap(c, d);
        nlo = std::max(v.lo, c);
        nhi = std::min(v.hi, d);
        if (nlo > v.lo + 1e-15 || nhi < v.hi - 1e-15) changed = true;
        v.lo = nlo;
        v.hi = nhi;
        if (v.empty()) return false;
      } else {
        // alpha == 0 pins |z_u| <= lambda
        double nlo = std::max(u.lo, -lambda), nhi = std::min(u.hi, lambda);
        if (nlo > u.lo + 1e-15 || nhi < u.hi - 1e-15) changed = true;
        u.lo = nlo;
        u.hi = nhi;
        if (u.empty()) return false;
      }
    }
    if (!changed) break;
  }
  return true;
}

// Feasibility with a deterministic witness: fix variables to interval
// midpoints one at a time, re-propagating after each choice.
bool extract_witness(const OneDimProblem& p, double lambda, std::vector<double>* out) {
  std::vector<Interval> iv(p.n);
  if (!propagate(p, lambda, &iv)) return false;
  for (int i = 0; i < p.n; ++i) {
    double mid = 0.5 * (iv[i].lo + iv[i].hi);
    iv[i].lo = iv[i].hi = mid;
    if (!propagate(p, lambda, &iv)) return false;
  }
  out->resize(p.n);
  for (int i = 0; i < p.n; ++i) (*out)[i] = iv[i].lo;
  return true;
}

}  // namespace

ExtensionResult extend_minimize(const MetricSheaf& sheaf, const Assignment& partial,
                                const ExtendOptions& options) {
  check_bound(sheaf, partial);
  const FiniteSpace& sp = sheaf.space();

  Workspace w;
  w.sheaf = &sheaf;
  w.objective = options.objective;
  w.fixed.resize(sp.open_count());
  w.is_free.assign(sp.open_count(), 0);
  w.euclid_offset.assign(sp.open_count(), -1);
  w.euclid_dim.assign(sp.open_count(), 0);

  bool any_support = false;
  for (int id = 0; id < sp.open_count(); ++id) {
    const PseudometricSpace& st = sheaf.stalk(id);
    bool forced = std::holds_alternative<OnePointSpace>(st) ||
                  (std::holds_alternative<EuclideanSpace>(st) &&
                   std::get<EuclideanSpace>(st).dim == 0);
    if (partial.support[id]) {
      if (!partial.values[id])
        fail(ErrorCode::partial_assignment, "declared support carries no value at " + sp.open_label(id));
      w.fixed[id] = *partial.values[id];
      any_support = true;
      continue;
    }
    if (forced) {
      w.fixed[id] = std::holds_alternative<OnePointSpace>(st)
                        ? StalkValue{std::monostate{}}
                        : StalkValue{std::vector<double>{}};
      continue;
    }
    w.is_free[id] = 1;
    if (const auto* e = std::get_if<EuclideanSpace>(&st)) {
      w.euclid_offset[id] = w.total_dim;
      w.euclid_dim[id] = e->dim;
      w.total_dim += e->dim;
      w.free_euclid.push_back(id);
    } else {
      w.free_table.push_back(id);
    }
  }
  if (!any_support) fail(ErrorCode::no_support, "at least one open set must carry a value");

  for (auto [u, v] : sp.inclusion_pairs()) {
    if (u == sp.empty_id()) continue;
    if (std::holds_alternative<OnePointSpace>(sheaf.stalk(u))) continue;
    w.terms.push_back({u, v});
  }

  // Table enumeration domain.
  std::vector<int> table_sizes;
  long long combos = 1;
  for (int id : w.free_table) {
    int n = static_cast<int>(std::get<FiniteTableSpace>(sheaf.stalk(id)).labels.size());
    table_sizes.push_back(n);
    combos *= n;
    if (combos > 200000)
      fail(ErrorCode::non_convergence, "finite-table search space too large to enumerate");
  }

  std::mt19937 rng(options.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  double scale = 1.0;
  for (int id = 0; id < sp.open_count(); ++id)
    if (partial.support[id] && partial.values[id])
      if (const auto* vec = std::get_if<std::vector<double>>(&*partial.values[id]))
        for (double x : *vec) scale = std::max(scale, std::fabs(x));

  // Candidate starts for the Euclidean block.
  auto propagation_start = [&](void) {
    std::vector<double> z(w.total_dim, 0.0);
    std::vector<char> has_value(sp.open_count(), 0);
    for (int id = 0; id < sp.open_count(); ++id)
      if (!w.is_free[id]) has_value[id] = 1;
    std::vector<int> order(sp.open_count());
    for (int i = 0; i < sp.open_count(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return sp.open_members(a).count() > sp.open_members(b).count();
    });
    std::vector<StalkValue> current = w.fixed;
    for (int id : order) {
      if (!w.is_free[id] || w.euclid_offset[id] < 0) continue;
      for (int v : order) {
        if (v == id || !has_value[v] || !sp.open_subset(id, v)) continue;
        StalkValue val = apply_map(sheaf.restriction(v, id), current[v]);
        if (const auto* vec = std::get_if<std::vector<double>>(&val)) {
          for (int k = 0; k < w.euclid_dim[id]; ++k) z[w.euclid_offset[id] + k] = (*vec)[k];
          current[id] = val;
          has_value[id] = 1;
          break;
        }
      }
    }
    return z;
  };

  std::vector<std::vector<double>> starts;
  starts.push_back(propagation_start());
  starts.emplace_back(w.total_dim, 0.0);
  {
    std::vector<double> warm(w.total_dim, 0.0);
    bool any_warm = false;
    for (int id : w.free_euclid)
      if (partial.values[id]) {
        const auto& vec = std::get<std::vector<double>>(*partial.values[id]);
        for (int k = 0; k < w.euclid_dim[id]; ++k) warm[w.euclid_offset[id] + k] = vec[k];
        any_warm = true;
      }
    if (any_warm) starts.push_back(std::move(warm));
  }
  for (int s = 0; s < options.random_starts; ++s) {
    std::vector<double> z(w.total_dim);
    for (double& x : z) x = gauss(rng) * scale;
    starts.push_back(std::move(z));
  }

  double const_floor = 0.0;
  {
    std::vector<double> zd(w.total_dim, 0.0);
    std::vector<int> td(w.free_table.size(), 0);
    for (const auto& t : w.terms)
      if (!w.is_free[t.sub] && !w.is_free[t.sup])
        const_floor = std::max(const_floor, w.term_value(t, zd, td));
  }

  long per_start = std::max<long>(1, options.iteration_budget / std::max<std::size_t>(1, starts.size()));

  ExtendDiagnostics diag;
  diag.starts = static_cast<int>(starts.size());

  // Enumerate table choices (exhaustively when tables are the only freedom;
  // otherwise alternate enumeration passes with continuous descent).
  std::vector<int> best_tables(w.free_table.size(), 0);
  std::vector<double> best_z(w.total_dim, 0.0);
  double best_value = kInf;
  bool any_completed = false;

  auto run_starts = [&](const std::vector<int>& tables, std::vector<double>* z_out) {
    double local_best = kInf;
    std::vector<double> local_z(w.total_dim, 0.0);
    auto evaluate = [&](const StartResult& r) {
      if (r.value < local_best) {
        local_best = r.value;
        local_z = r.z;
      }
      diag.iterations += r.iterations;
      diag.final_step = r.final_step;
      if (r.completed) any_completed = true;
    };
    if (options.threads > 1 && starts.size() > 1) {
      std::vector<std::future<StartResult>> futs;
      for (const auto& s : starts)
        futs.push_back(std::async(std::launch::async, [&, s]() {
          return run_descent(w, s, tables, const_floor, options.tolerance, per_start);
        }));
      for (auto& f : futs) evaluate(f.get());
    } else {
      for (const auto& s : starts) evaluate(run_descent(w, s, tables, const_floor, options.tolerance, per_start));
    }
    *z_out = local_z;
    return local_best;
  };

  if (w.free_table.empty()) {
    best_value = run_starts({}, &best_z);
  } else if (w.free_euclid.empty()) {
    std::vector<int> tables(w.free_table.size(), 0);
    for (long long c = 0; c < combos; ++c) {
      long long rem = c;
      for (std::size_t i = 0; i < tables.size(); ++i) {
        tables[i] = static_cast<int>(rem % table_sizes[i]);
        rem /= table_sizes[i];
      }
      double v = w.objective_value({}, tables);
      if (v < best_value) {
        best_value = v;
        best_tables = tables;
      }
    }
    any_completed = true;
  } else {
    // Mixed: alternate descent with coordinate-exhaustive table passes.
    std::vector<int> tables(w.free_table.size(), 0);
    std::vector<double> z;
    best_value = run_starts(tables, &z);
    best_z = z;
    best_tables = tables;
    for (int pass = 0; pass < 8; ++pass) {
      bool changed = false;
      for (std::size_t i = 0; i < tables.size(); ++i) {
        int orig = tables[i];
        int keep = orig;
        double local = kInf;
        for (int c = 0; c < table_sizes[i]; ++c) {
          tables[i] = c;
          double v = w.objective_value(best_z, tables);
          if (v < local) {
            local = v;
            keep = c;
          }
        }
        tables[i] = keep;
        if (keep != orig) changed = true;
      }
      double v = run_starts(tables, &z);
      if (v < best_value - options.tolerance * 1e-3) {
        best_value = v;
        best_z = z;
        best_tables = tables;
      }
      if (!changed) break;
    }
  }

  diag.internal_value = best_value;

  // Exact epigraph refinement when every free variable is a scalar.
  OneDimProblem p1;
  if (build_onedim(w, &p1)) {
    double lo = p1.const_floor;
    double hi = std::max(best_value, lo);
    std::vector<double> witness;
    if (!extract_witness(p1, hi, &witness)) hi = std::max(hi * 2.0 + 1.0, 1.0);
    if (extract_witness(p1, hi, &witness)) {
      for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
        double mid = 0.5 * (lo + hi);
        std::vector<double> cand;
        if (extract_witness(p1, mid, &cand) && w.objective_value(cand, {}) <= mid + 1e-9)
          hi = mid;
        else
          lo = mid;
      }
      std::vector<double> final_witness;
      if (extract_witness(p1, hi, &final_witness)) {
        double v = w.objective_value(final_witness, {});
        if (v <= best_value + 1e-12) {
          best_value = v;
          best_z = final_witness;
          diag.refined = true;
          any_completed = true;
        }
      }
    }
  }

  if (!any_completed)
    fail(ErrorCode::non_convergence,
         "iteration budget exhausted before any start stabilized (iterations=" +
             std::to_string(diag.iterations) + ")");

  Assignment full = partial;
  for (int id = 0; id < sp.open_count(); ++id) {
    if (partial.support[id]) continue;
    full.values[id] = w.value_of(id, best_z, best_tables);
    full.support[id] = 0;
  }

  ExtensionResult res{std::move(full), 0.0, 0.0, diag};
  res.achieved_radius = consistency_radius(sheaf, res.assignment);
  res.achieved_objective = options.objective == ExtendObjective::linf
                               ? res.achieved_radius
                               : consistency_radius_l2(sheaf, res.assignment);
  return res;
}

double partial_consistency(const MetricSheaf& sheaf, const Assignment& partial,
                           const ExtendOptions& options) {
  return extend_minimize(sheaf, partial, options).achieved_radius;
}

}  // namespace sheaflens
