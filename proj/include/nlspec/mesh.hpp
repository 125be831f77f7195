#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlspec {

/// Uniform mesh on the interval (a, b): n interior nodes, n+1 cells, and the
/// hat basis at interior nodes extended by zero outside (a, b).
struct Mesh {
  double a;
  double b;
  int n;

  Mesh(double a_, double b_, int n_) : a(a_), b(b_), n(n_) {
    if (!(a < b)) throw std::invalid_argument("Mesh: require a < b");
    if (n < 1) throw std::invalid_argument("Mesh: need at least one interior node");
  }

  double spacing() const { return (b - a) / (n + 1); }
  /// Interior node position, 0-based index in [0, n).
  double node(int i) const { return a + (i + 1) * spacing(); }
  int cell_count() const { return n + 1; }
  double cell_left(int c) const { return a + c * spacing(); }
  double cell_right(int c) const { return a + (c + 1) * spacing(); }
  double cell_mid(int c) const { return a + (c + 0.5) * spacing(); }
  bool same_geometry(const Mesh& o) const { return a == o.a && b == o.b && n == o.n; }
};

/// Hat basis value at x. Support is [node - h, node + h], always inside [a, b].
inline double hat_value(const Mesh& m, int i, double x) {
  const double h = m.spacing();
  const double d = std::abs(x - m.node(i));
  return d >= h ? 0.0 : 1.0 - d / h;
}

/// Piecewise-constant weight: one value per mesh cell.
struct Weight {
  std::vector<double> cells;

  static Weight constant(const Mesh& m, double v) {
    Weight w;
    w.cells.assign(m.cell_count(), v);
    return w;
  }
  static Weight from_cells(const Mesh& m, std::vector<double> values) {
    if (static_cast<int>(values.size()) != m.cell_count())
      throw std::invalid_argument("Weight: cell count does not match the mesh");
    Weight w;
    w.cells = std::move(values);
    return w;
  }
  /// Named profile sampled at cell midpoints.
  static Weight from_expr(const Mesh& m, const std::string& tag) {
    Weight w;
    w.cells.resize(m.cell_count());
    const double mid = 0.5 * (m.a + m.b);
    for (int c = 0; c < m.cell_count(); ++c) {
      const double x = m.cell_mid(c);
      if (tag == "one")
        w.cells[c] = 1.0;
      else if (tag == "minus_one")
        w.cells[c] = -1.0;
      else if (tag == "sign_split")
        w.cells[c] = x < mid ? 1.0 : -1.0;
      else if (tag == "ramp")
        w.cells[c] = 2.0 * (x - m.a) / (m.b - m.a) - 1.0;
      else
        throw std::invalid_argument("unknown weight expression tag '" + tag + "'");
    }
    return w;
  }

  double sup_norm() const {
    double v = 0.0;
    for (double c : cells) v = std::max(v, std::abs(c));
    return v;
  }
  bool has_positive_part() const {
    return std::any_of(cells.begin(), cells.end(), [](double c) { return c > 0.0; });
  }
  bool has_negative_part() const {
    return std::any_of(cells.begin(), cells.end(), [](double c) { return c < 0.0; });
  }
  bool is_zero() const { return sup_norm() == 0.0; }

  Weight shifted(double eps) const {
    Weight w = *this;
    for (double& c : w.cells) c += eps;
    return w;
  }
  Weight shifted_on(const std::vector<int>& cell_ids, double eps) const {
    Weight w = *this;
    for (int c : cell_ids) {
      if (c < 0 || c >= static_cast<int>(w.cells.size()))
        throw std::out_of_range("Weight::shifted_on: cell index out of range");
      w.cells[c] += eps;
    }
    return w;
  }
  Weight scaled(double factor) const {
    Weight w = *this;
    for (double& c : w.cells) c *= factor;
    return w;
  }
};

}  // namespace nlspec
