#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "conslaw/error.hpp"

namespace conslaw {

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

namespace detail {
template <class Term>
double pairwise_sum_range(std::size_t begin, std::size_t len, Term& term) {
  switch (len) {
    case 1:
      return term(begin);
    case 2:
      return term(begin) + term(begin + 1);
    case 3:
      return (term(begin) + term(begin + 1)) + term(begin + 2);
    case 4:
      return (term(begin) + term(begin + 1)) + (term(begin + 2) + term(begin + 3));
    default:
      break;
  }
  const std::size_t left = std::bit_floor(len - 1);
  return pairwise_sum_range(begin, left, term) + pairwise_sum_range(begin + left, len - left, term);
}
}  // namespace detail

/// Pairwise sum of term(0) + ... + term(n-1) over a fixed binary tree.
///
/// The left subtree of every node always covers the largest power of two
/// strictly below the node's length. Summing consecutive groups of 2^k
/// terms first and then reducing the group sums with this function gives
/// the same bits as reducing the ungrouped terms.
template <class Term>
double pairwise_sum(std::size_t n, Term&& term) {
  if (n == 0) return 0.0;
  return detail::pairwise_sum_range(0, n, term);
}

inline double pairwise_sum(std::span<const double> xs) {
  return pairwise_sum(xs.size(), [xs](std::size_t i) { return xs[i]; });
}

/// Correctly rounded sum (Shewchuk partials, as in Python's math.fsum).
///
/// The result depends only on the multiset of terms, so reductions over a
/// field are invariant under any permutation of its cells.
template <class Term>
double exact_sum(std::size_t n, Term&& term) {
  std::vector<double> partials;
  for (std::size_t k = 0; k < n; ++k) {
    double x = term(k);
    std::size_t used = 0;
    for (double y : partials) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials[used++] = lo;
      x = hi;
    }
    partials.resize(used);
    partials.push_back(x);
  }
  if (partials.empty()) return 0.0;
  std::size_t i = partials.size() - 1;
  double hi = partials[i];
  double lo = 0.0;
  while (i > 0) {
    const double x = hi;
    const double y = partials[--i];
    hi = x + y;
    const double yr = hi - x;
    lo = y - yr;
    if (lo != 0.0) break;
  }
  // Round-half-even correction when the tail sits exactly on a tie.
  if (i > 0 && ((lo < 0.0 && partials[i - 1] < 0.0) || (lo > 0.0 && partials[i - 1] > 0.0))) {
    const double y = lo * 2.0;
    const double x = hi + y;
    if (y == x - hi) hi = x;
  }
  return hi;
}

inline double exact_sum(std::span<const double> xs) {
  return exact_sum(xs.size(), [xs](std::size_t i) { return xs[i]; });
}

// ---------------------------------------------------------------------------
// Grid, interval, field
// ---------------------------------------------------------------------------

/// Uniform periodic grid on the unit torus T^dim, dim in {1, 2}.
class TorusGrid {
 public:
  TorusGrid(int dim, int cells_per_axis) : dim_(dim), n_(cells_per_axis) {
    if (dim != 1 && dim != 2) throw InputError("unsupported dimension " + std::to_string(dim));
    if (cells_per_axis < 2) throw InputError("need at least 2 cells per axis");
  }

  int dim() const { return dim_; }
  int cells_per_axis() const { return n_; }
  double cell_size() const { return 1.0 / n_; }
  /// h^dim, the volume of one cell.
  double cell_volume() const { return dim_ == 1 ? 1.0 / n_ : 1.0 / (double(n_) * n_); }
  std::size_t cell_count() const { return dim_ == 1 ? std::size_t(n_) : std::size_t(n_) * n_; }

  /// Periodic wrap of an axis index.
  int wrap(int i) const { return ((i % n_) + n_) % n_; }

  /// Row-major flat index; i runs along axis 0 (x), j along axis 1 (y).
  std::size_t index(int i, int j = 0) const {
    return dim_ == 1 ? std::size_t(wrap(i)) : std::size_t(wrap(i)) * n_ + std::size_t(wrap(j));
  }

  /// Flat index of the neighbour at offset `step` along `axis`.
  std::size_t neighbor(std::size_t cell, int axis, int step) const {
    if (dim_ == 1) return std::size_t(wrap(int(cell) + step));
    const int i = int(cell / n_);
    const int j = int(cell % n_);
    return axis == 0 ? index(i + step, j) : index(i, j + step);
  }

  /// Cell-centre coordinate along an axis.
  double center(int i) const { return (i + 0.5) / n_; }

  bool operator==(const TorusGrid&) const = default;

 private:
  int dim_;
  int n_;
};

inline TorusGrid make_grid(int dim, int n) { return TorusGrid(dim, n); }

/// Closed interval [lo, hi] with lo < hi.
struct Interval {
  double lo;
  double hi;

  Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(lo < hi)) throw InputError("interval requires lo < hi");
  }
  double length() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool operator==(const Interval&) const = default;
};

/// Cell-averaged scalar field on a torus grid.
class ScalarField {
 public:
  explicit ScalarField(TorusGrid grid, double value = 0.0)
      : grid_(grid), values_(grid.cell_count(), value) {}

  ScalarField(TorusGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.cell_count()) throw InputError("field length does not match grid");
    for (double v : values_)
      if (!std::isfinite(v)) throw InputError("field values must be finite");
  }

  const TorusGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  double min() const {
    double m = std::numeric_limits<double>::infinity();
    for (double v : values_) m = std::min(m, v);
    return m;
  }
  double max() const {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : values_) m = std::max(m, v);
    return m;
  }

 private:
  TorusGrid grid_;
  std::vector<double> values_;
};

/// Midpoint sampling of u0(x) (dim 1) or u0(x, y) (dim 2).
template <class Fn>
ScalarField sample_midpoint(const TorusGrid& grid, Fn&& u0) {
  std::vector<double> v(grid.cell_count());
  const int n = grid.cells_per_axis();
  if (grid.dim() == 1) {
    for (int i = 0; i < n; ++i) {
      if constexpr (std::is_invocable_v<Fn, double>) {
        v[i] = u0(grid.center(i));
      } else {
        v[i] = u0(grid.center(i), 0.0);
      }
    }
  } else {
    if constexpr (std::is_invocable_v<Fn, double, double>) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) v[grid.index(i, j)] = u0(grid.center(i), grid.center(j));
    } else {
      throw InputError("2-D grid needs an initial profile u0(x, y)");
    }
  }
  return ScalarField(grid, std::move(v));
}

// ---------------------------------------------------------------------------
// Norms and means
// ---------------------------------------------------------------------------

/// Integral over the torus (volume 1) of the cell averages.
/// Summed as min + exact_sum(u - min) / count, which is independent of the
/// cell order and returns a constant field's value exactly.
inline double mean(const ScalarField& u) {
  const double lo = u.min();
  const auto vals = u.values();
  return lo + exact_sum(vals.size(), [&](std::size_t i) { return vals[i] - lo; }) / double(vals.size());
}

inline void require_same_grid(const ScalarField& u, const ScalarField& v) {
  if (!(u.grid() == v.grid())) throw InputError("grid mismatch");
}

/// Discrete L^p distance (sum |u - v|^p h^dim)^(1/p).
inline double lp_distance(const ScalarField& u, const ScalarField& v, double p = 1.0) {
  require_same_grid(u, v);
  if (!(p >= 1.0)) throw InputError("lp_distance needs p >= 1");
  const auto a = u.values();
  const auto b = v.values();
  double s;
  if (p == 1.0) {
    s = exact_sum(a.size(), [&](std::size_t i) { return std::abs(a[i] - b[i]); });
    return s / double(u.grid().cell_count());
  }
  if (p == 2.0) {
    s = exact_sum(a.size(), [&](std::size_t i) {
      const double d = a[i] - b[i];
      return d * d;
    });
    return std::sqrt(s / double(u.grid().cell_count()));
  }
  s = exact_sum(a.size(), [&](std::size_t i) { return std::pow(std::abs(a[i] - b[i]), p); });
  return std::pow(s / double(u.grid().cell_count()), 1.0 / p);
}

/// L^p distance to a constant.
inline double lp_distance(const ScalarField& u, double c, double p = 1.0) {
  return lp_distance(u, ScalarField(u.grid(), c), p);
}

inline double linf_norm(const ScalarField& u) {
  double m = 0.0;
  for (double v : u.values()) m = std::max(m, std::abs(v));
  return m;
}

/// Discrete total variation: sum over axes of sum |u(i+e) - u(i)| h^(dim-1).
inline double bv_seminorm(const ScalarField& u) {
  const auto& g = u.grid();
  const auto vals = u.values();
  const double weight = g.dim() == 1 ? 1.0 : g.cell_size();
  std::vector<double> jumps;
  jumps.reserve(vals.size() * g.dim());
  for (int axis = 0; axis < g.dim(); ++axis) {
    for (std::size_t c = 0; c < vals.size(); ++c) jumps.push_back(std::abs(vals[g.neighbor(c, axis, 1)] - vals[c]));
  }
  return exact_sum(jumps) * weight;
}

/// Periodic shift by whole cells: result(i) = u(i - shift) along `axis`.
inline ScalarField shift_cells(const ScalarField& u, int shift, int axis = 0) {
  const auto& g = u.grid();
  std::vector<double> out(u.size());
  for (std::size_t c = 0; c < u.size(); ++c) out[g.neighbor(c, axis, shift)] = u[c];
  return ScalarField(g, std::move(out));
}

// ---------------------------------------------------------------------------
// Field dump: "# dim,N" then one "index,value" row per cell
// ---------------------------------------------------------------------------

inline void write_field_csv(std::ostream& os, const ScalarField& u) {
  os << "# " << u.grid().dim() << ',' << u.grid().cells_per_axis() << '\n';
  os << std::setprecision(17);
  for (std::size_t i = 0; i < u.size(); ++i) os << i << ',' << u[i] << '\n';
}

inline ScalarField read_field_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0) throw InputError("field dump: missing '# dim,N' header");
  int dim = 0, n = 0;
  char comma = 0;
  std::istringstream hdr(line.substr(2));
  if (!(hdr >> dim >> comma >> n) || comma != ',') throw InputError("field dump: malformed header");
  TorusGrid grid(dim, n);
  std::vector<double> vals(grid.cell_count());
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::size_t idx = 0;
    double v = 0.0;
    if (!(row >> idx >> comma >> v) || comma != ',' || idx >= vals.size())
      throw InputError("field dump: malformed row '" + line + "'");
    vals[idx] = v;
    ++rows;
  }
  if (rows != vals.size()) throw InputError("field dump: row count does not match grid");
  return ScalarField(grid, std::move(vals));
}

}  // namespace conslaw
