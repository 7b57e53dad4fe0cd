#include "sheaflens/pseudometric.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

namespace sheaflens {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double vec_norm(const std::vector<double>& v, Metric metric) {
  double acc = 0.0;
  if (metric == Metric::linf) {
    for (double x : v) acc = std::max(acc, std::fabs(x));
  } else {
    for (double x : v) acc += x * x;
    acc = std::sqrt(acc);
  }
  return acc;
}

// Largest singular value via power iteration on A^T A; inflated slightly so
// the result stays a valid upper bound.
double spectral_norm(const LinearMap& m) {
  if (m.rows == 0 || m.cols == 0) return 0.0;
  if (m.rows == 1 && m.cols == 1) return std::fabs(m.a[0]);
  std::vector<double> v(m.cols, 1.0 / std::sqrt(double(m.cols)));
  double sigma = 0.0;
  for (int it = 0; it < 10000; ++it) {
    std::vector<double> av(m.rows, 0.0);
    for (int i = 0; i < m.rows; ++i)
      for (int j = 0; j < m.cols; ++j) av[i] += m.at(i, j) * v[j];
    std::vector<double> atav(m.cols, 0.0);
    for (int j = 0; j < m.cols; ++j)
      for (int i = 0; i < m.rows; ++i) atav[j] += m.at(i, j) * av[i];
    double norm = vec_norm(atav, Metric::l2);
    if (norm == 0.0) return 0.0;
    for (int j = 0; j < m.cols; ++j) v[j] = atav[j] / norm;
    double next = std::sqrt(norm);
    if (std::fabs(next - sigma) <= 1e-12 * std::max(1.0, next)) {
      sigma = next;
      break;
    }
    sigma = next;
  }
  return sigma * (1.0 + 1e-9);
}

}  // namespace

void validate_space(const PseudometricSpace& space) {
  if (const auto* t = std::get_if<FiniteTableSpace>(&space)) {
    const int n = static_cast<int>(t->labels.size());
    if (n == 0) fail(ErrorCode::invalid_pseudometric, "finite table with no elements");
    if (t->dist.size() != static_cast<std::size_t>(n) * n)
      fail(ErrorCode::invalid_pseudometric, "distance table shape mismatch");
    for (int i = 0; i < n; ++i) {
      if (t->at(i, i) != 0.0) fail(ErrorCode::invalid_pseudometric, "nonzero self-distance");
      for (int j = 0; j < n; ++j) {
        if (t->at(i, j) < 0.0) fail(ErrorCode::invalid_pseudometric, "negative distance");
        if (t->at(i, j) != t->at(j, i)) fail(ErrorCode::invalid_pseudometric, "asymmetric table");
        for (int k = 0; k < n; ++k)
          if (t->at(i, j) > t->at(i, k) + t->at(k, j) + 1e-12)
            fail(ErrorCode::invalid_pseudometric, "triangle inequality fails at (" +
                                                      t->labels[i] + "," + t->labels[j] + "," +
                                                      t->labels[k] + ")");
      }
    }
  } else if (const auto* e = std::get_if<EuclideanSpace>(&space)) {
    if (e->dim < 0) fail(ErrorCode::invalid_pseudometric, "negative dimension");
  }
}

bool in_carrier(const PseudometricSpace& space, const StalkValue& v) {
  if (std::holds_alternative<OnePointSpace>(space)) return std::holds_alternative<std::monostate>(v);
  if (const auto* e = std::get_if<EuclideanSpace>(&space)) {
    const auto* x = std::get_if<std::vector<double>>(&v);
    return x && static_cast<int>(x->size()) == e->dim;
  }
  const auto& t = std::get<FiniteTableSpace>(space);
  const auto* i = std::get_if<int>(&v);
  return i && *i >= 0 && *i < static_cast<int>(t.labels.size());
}

double distance(const PseudometricSpace& space, const StalkValue& a, const StalkValue& b) {
  if (std::holds_alternative<OnePointSpace>(space)) return 0.0;
  if (const auto* e = std::get_if<EuclideanSpace>(&space)) {
    const auto& x = std::get<std::vector<double>>(a);
    const auto& y = std::get<std::vector<double>>(b);
    std::vector<double> diff(e->dim);
    for (int i = 0; i < e->dim; ++i) diff[i] = x[i] - y[i];
    return vec_norm(diff, e->metric);
  }
  const auto& t = std::get<FiniteTableSpace>(space);
  return t.at(std::get<int>(a), std::get<int>(b));
}

std::string value_to_string(const PseudometricSpace& space, const StalkValue& v) {
  if (std::holds_alternative<OnePointSpace>(space)) return "*";
  if (std::holds_alternative<EuclideanSpace>(space)) {
    std::ostringstream os;
    os << '(';
    const auto& x = std::get<std::vector<double>>(v);
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
    os << ')';
    return os.str();
  }
  return std::get<FiniteTableSpace>(space).labels[std::get<int>(v)];
}

LinearMap LinearMap::identity(int n) {
  LinearMap m{n, n, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0)};
  for (int i = 0; i < n; ++i) m.a[static_cast<std::size_t>(i) * n + i] = 1.0;
  return m;
}

bool shape_matches(const MapBody& body, const PseudometricSpace& src, const PseudometricSpace& dst) {
  if (std::holds_alternative<CollapseMap>(body)) return std::holds_alternative<OnePointSpace>(dst);
  if (const auto* lin = std::get_if<LinearMap>(&body)) {
    const auto* es = std::get_if<EuclideanSpace>(&src);
    const auto* ed = std::get_if<EuclideanSpace>(&dst);
    return es && ed && lin->cols == es->dim && lin->rows == ed->dim &&
           lin->a.size() == static_cast<std::size_t>(lin->rows) * lin->cols;
  }
  const auto& tab = std::get<TableMap>(body);
  const auto* ts = std::get_if<FiniteTableSpace>(&src);
  const auto* td = std::get_if<FiniteTableSpace>(&dst);
  if (!ts || !td || tab.to.size() != ts->labels.size()) return false;
  for (int i : tab.to)
    if (i < 0 || i >= static_cast<int>(td->labels.size())) return false;
  return true;
}

double lipschitz_constant(const MapBody& body, const PseudometricSpace& src,
                          const PseudometricSpace& dst) {
  if (std::holds_alternative<CollapseMap>(body)) return 0.0;
  if (const auto* lin = std::get_if<LinearMap>(&body)) {
    Metric ms = std::get<EuclideanSpace>(src).metric;
    Metric md = std::get<EuclideanSpace>(dst).metric;
    if (ms == Metric::linf && md == Metric::linf) {
      double k = 0.0;
      for (int i = 0; i < lin->rows; ++i) {
        double row = 0.0;
        for (int j = 0; j < lin->cols; ++j) row += std::fabs(lin->at(i, j));
        k = std::max(k, row);
      }
      return k;
    }
    if (ms == Metric::l2 && md == Metric::l2) return spectral_norm(*lin);
    if (ms == Metric::l2 && md == Metric::linf) {
      double k = 0.0;
      for (int i = 0; i < lin->rows; ++i) {
        double row = 0.0;
        for (int j = 0; j < lin->cols; ++j) row += lin->at(i, j) * lin->at(i, j);
        k = std::max(k, std::sqrt(row));
      }
      return k;
    }
    // linf source, l2 target: row-sum bound.
    double acc = 0.0;
    for (int i = 0; i < lin->rows; ++i) {
      double row = 0.0;
      for (int j = 0; j < lin->cols; ++j) row += std::fabs(lin->at(i, j));
      acc += row * row;
    }
    return std::sqrt(acc);
  }
  const auto& tab = std::get<TableMap>(body);
  const auto& ts = std::get<FiniteTableSpace>(src);
  const auto& td = std::get<FiniteTableSpace>(dst);
  double k = 0.0;
  const int n = static_cast<int>(ts.labels.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double ds = ts.at(i, j);
      double dd = td.at(tab.to[i], tab.to[j]);
      if (ds == 0.0) {
        if (dd > 0.0) return kInf;
      } else {
        k = std::max(k, dd / ds);
      }
    }
  return k;
}

RestrictionMap make_map(MapBody body, const PseudometricSpace& src, const PseudometricSpace& dst) {
  if (!shape_matches(body, src, dst))
    fail(ErrorCode::stalk_shape_mismatch, "map body does not match stalk carriers");
  double k = lipschitz_constant(body, src, dst);
  return RestrictionMap{std::move(body), k};
}

RestrictionMap identity_restriction(const PseudometricSpace& space) {
  if (std::holds_alternative<OnePointSpace>(space)) return RestrictionMap{CollapseMap{}, 0.0};
  if (const auto* e = std::get_if<EuclideanSpace>(&space))
    return RestrictionMap{LinearMap::identity(e->dim), 1.0};
  const auto& t = std::get<FiniteTableSpace>(space);
  TableMap id;
  id.to.resize(t.labels.size());
  for (std::size_t i = 0; i < id.to.size(); ++i) id.to[i] = static_cast<int>(i);
  return RestrictionMap{std::move(id), 1.0};
}

StalkValue apply_map(const RestrictionMap& m, const StalkValue& v) {
  if (std::holds_alternative<CollapseMap>(m.body)) return std::monostate{};
  if (const auto* lin = std::get_if<LinearMap>(&m.body)) {
    const auto& x = std::get<std::vector<double>>(v);
    std::vector<double> y(lin->rows, 0.0);
    for (int i = 0; i < lin->rows; ++i)
      for (int j = 0; j < lin->cols; ++j) y[i] += lin->at(i, j) * x[j];
    return y;
  }
  return std::get<TableMap>(m.body).to[std::get<int>(v)];
}

RestrictionMap compose(const RestrictionMap& outer, const RestrictionMap& inner) {
  RestrictionMap r;
  r.lipschitz = outer.lipschitz * inner.lipschitz;
  if (std::holds_alternative<CollapseMap>(outer.body)) {
    r.body = CollapseMap{};
    r.lipschitz = 0.0;
    return r;
  }
  if (std::holds_alternative<CollapseMap>(inner.body))
    fail(ErrorCode::chain_mismatch, "cannot compose out of a collapsed stalk");
  if (const auto* lo = std::get_if<LinearMap>(&outer.body)) {
    const auto& li = std::get<LinearMap>(inner.body);
    LinearMap m{lo->rows, li.cols,
                std::vector<double>(static_cast<std::size_t>(lo->rows) * li.cols, 0.0)};
    for (int i = 0; i < lo->rows; ++i)
      for (int k = 0; k < lo->cols; ++k) {
        if (lo->at(i, k) == 0.0) continue;
        for (int j = 0; j < li.cols; ++j)
          m.a[static_cast<std::size_t>(i) * li.cols + j] += lo->at(i, k) * li.at(k, j);
      }
    r.body = std::move(m);
    return r;
  }
  const auto& to_ = std::get<TableMap>(outer.body);
  const auto& ti = std::get<TableMap>(inner.body);
  TableMap m;
  m.to.resize(ti.to.size());
  for (std::size_t i = 0; i < ti.to.size(); ++i) m.to[i] = to_.to[ti.to[i]];
  r.body = std::move(m);
  return r;
}

double map_deviation(const RestrictionMap& f, const RestrictionMap& g,
                     const PseudometricSpace& src, const PseudometricSpace& dst) {
  if (std::holds_alternative<OnePointSpace>(dst)) return 0.0;
  double dev = 0.0;
  if (const auto* e = std::get_if<EuclideanSpace>(&src)) {
    for (int j = 0; j < e->dim; ++j) {
      std::vector<double> basis(e->dim, 0.0);
      basis[j] = 1.0;
      StalkValue v = basis;
      dev = std::max(dev, distance(dst, apply_map(f, v), apply_map(g, v)));
    }
    return dev;
  }
  const auto& t = std::get<FiniteTableSpace>(src);
  for (int i = 0; i < static_cast<int>(t.labels.size()); ++i) {
    StalkValue v = i;
    dev = std::max(dev, distance(dst, apply_map(f, v), apply_map(g, v)));
  }
  return dev;
}

}  // namespace sheaflens
