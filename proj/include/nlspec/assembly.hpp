#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nlspec/kernel.hpp"
#include "nlspec/mesh.hpp"
#include "nlspec/parallel.hpp"
#include "nlspec/quadrature.hpp"

namespace nlspec {

struct QuadratureSettings {
  int gauss_points = 12;    // tensor rule on well-separated cell pairs
  int jacobi_points = 16;   // singularity-absorbing rules on touching pairs
  double tail_tol = 1e-10;  // dyadic cutoff for modulated exterior tails
  bool self_check = true;
  double self_check_tol = 1e-8;  // max relative entry drift when points double
  int self_check_samples = 10;   // sampled entries used when n > 32
  std::uint64_t self_check_seed = 0x6c8e944d1f3a5b2cULL;
};

namespace detail {

struct LocalEntry {
  int i, j;  // node indices, i <= j
  double value;
};

struct StiffnessRules {
  Rule01 gl;          // smooth factors and tensor products
  Rule01 jac_same;    // weight t^{1-2s}: same-cell reduction
  Rule01 jac_corner;  // weight t^{2-2s}: corner triangle and boundary tails
};

inline StiffnessRules make_stiffness_rules(const Kernel& k, int gq, int jq) {
  return {gauss_rule_01(gq), jacobi_rule_01(jq, 1.0 - 2.0 * k.s),
          jacobi_rule_01(jq, 2.0 - 2.0 * k.s)};
}

// Nodes whose hat touches cell c: c-1 (descending) and c (ascending), clipped
// to the interior range [0, n).
inline int active_nodes(const Mesh& m, int c, int out[2]) {
  int cnt = 0;
  if (c - 1 >= 0 && c - 1 < m.n) out[cnt++] = c - 1;
  if (c >= 0 && c < m.n) out[cnt++] = c;
  return cnt;
}

// Interaction integral of (phi_i(x)-phi_i(y))(phi_j(x)-phi_j(y)) K(x-y) over
// cell p x cell q, q >= p, for every node pair the two cells touch. Values are
// for the ordered pair (p, q); the caller doubles q > p contributions, which
// is exact because the integrand is symmetric under swapping x and y.
inline void cell_pair_local(const Kernel& k, const Mesh& m, int p, int q,
                            const StiffnessRules& R, std::vector<LocalEntry>& out) {
  out.clear();
  const double h = m.spacing();

  if (q >= p + 2) {
    // hats are smooth here: plain tensor Gauss
    int act[4];
    int na = active_nodes(m, p, act);
    na += active_nodes(m, q, act + na);
    double acc[4][4] = {};
    const double xl = m.cell_left(p), yl = m.cell_left(q);
    for (int it = 0; it < R.gl.size(); ++it) {
      const double x = xl + h * R.gl.t[it];
      for (int iu = 0; iu < R.gl.size(); ++iu) {
        const double y = yl + h * R.gl.t[iu];
        const double wk = R.gl.w[it] * R.gl.w[iu] * h * h * eval_kernel(k, x - y);
        double D[4];
        for (int a = 0; a < na; ++a)
          D[a] = hat_value(m, act[a], x) - hat_value(m, act[a], y);
        for (int a = 0; a < na; ++a)
          for (int b = a; b < na; ++b) acc[a][b] += wk * D[a] * D[b];
      }
    }
    for (int a = 0; a < na; ++a)
      for (int b = a; b < na; ++b) out.push_back({act[a], act[b], acc[a][b]});
    return;
  }

  if (q == p) {
    // Both hats are linear on the cell, so the difference factors contribute
    // exactly (x-y)^2 and the double integral collapses:
    //   int int_{C^2} F(x-y) dx dy = 2 int_0^h F(u) (h-u) du   (F even),
    // leaving the Jacobi weight u^{1-2s} after (x-y)^2 cancels the kernel.
    int act[2];
    const int na = active_nodes(m, p, act);
    double r1d = 0.0;
    for (int jn = 0; jn < R.jac_same.size(); ++jn)
      r1d += R.jac_same.w[jn] * k.regular_factor(h * R.jac_same.t[jn]) *
             (1.0 - R.jac_same.t[jn]);
    r1d *= 2.0 * std::pow(h, 3.0 - 2.0 * k.s);
    for (int a = 0; a < na; ++a) {
      const double sa = (act[a] == p ? 1.0 : -1.0) / h;
      for (int b = a; b < na; ++b) {
        const double sb = (act[b] == p ? 1.0 : -1.0) / h;
        out.push_back({act[a], act[b], sa * sb * r1d});
      }
    }
    return;
  }

  // Adjacent cells q == p+1 share the corner x = y at the node between them.
  // With xi = (corner - x) and eta = (y - corner), hats are linear on each
  // side and continuous at the corner, so the differences are homogeneous
  // linear in (xi, eta):
  //   D_{p-1} = xi/h,  D_p = (eta-xi)/h,  D_{p+1} = -eta/h.
  // Splitting the (xi,eta) square along xi+eta = h:
  //  - near triangle, r = xi+eta in [0,h], xi = r w: the integrand separates
  //    into [int_0^h R(r) r^{2-2s} dr] x [int_0^1 coef_a coef_b dw];
  //  - far triangle, r in [h,2h]: smooth, tensor Gauss with Jacobian (2h-r).
  {
    const int cand[3] = {p - 1, p, p + 1};
    int act[3];
    int na = 0;
    for (int c : cand)
      if (c >= 0 && c < m.n) act[na++] = c;

    auto coef = [&](int node, double w) {
      if (node == p - 1) return w / h;
      if (node == p) return (1.0 - 2.0 * w) / h;
      return -(1.0 - w) / h;
    };

    double rint = 0.0;
    for (int jn = 0; jn < R.jac_corner.size(); ++jn)
      rint += R.jac_corner.w[jn] * k.regular_factor(h * R.jac_corner.t[jn]);
    rint *= std::pow(h, 3.0 - 2.0 * k.s);

    double acc[3][3] = {};
    for (int a = 0; a < na; ++a)
      for (int b = a; b < na; ++b) {
        double wint = 0.0;
        for (int iw = 0; iw < R.gl.size(); ++iw)
          wint += R.gl.w[iw] * coef(act[a], R.gl.t[iw]) * coef(act[b], R.gl.t[iw]);
        acc[a][b] = rint * wint;
      }

    for (int ir = 0; ir < R.gl.size(); ++ir) {
      const double r = h * (1.0 + R.gl.t[ir]);
      const double kr = eval_kernel(k, r);
      const double width = 2.0 * h - r;
      for (int iw = 0; iw < R.gl.size(); ++iw) {
        const double xi = (r - h) + width * R.gl.t[iw];
        const double eta = r - xi;
        const double wk = R.gl.w[ir] * R.gl.w[iw] * h * width * kr;
        double D[3];
        for (int a = 0; a < na; ++a) {
          if (act[a] == p - 1)
            D[a] = xi / h;
          else if (act[a] == p)
            D[a] = (eta - xi) / h;
          else
            D[a] = -eta / h;
        }
        for (int a = 0; a < na; ++a)
          for (int b = a; b < na; ++b) acc[a][b] += wk * D[a] * D[b];
      }
    }
    for (int a = 0; a < na; ++a)
      for (int b = a; b < na; ++b) out.push_back({act[a], act[b], acc[a][b]});
  }
}

// Exterior contribution 2 int_cell phi_i phi_j(x) Phi(x) dx with
// Phi(x) = tail(x - a) + tail(b - x), tail(d) = int_d^inf K. The tails are
// analytic inside the interval; on the two boundary cells the d^{-2s} blow-up
// is paired with the quadratic vanishing of the single active hat, leaving a
// t^{2-2s} Jacobi weight against the bounded factor W(d) = d^{2s} tail(d).
inline void cell_exterior_local(const Kernel& k, const Mesh& m, int c,
                                const StiffnessRules& R, double tail_tol,
                                std::vector<LocalEntry>& out) {
  out.clear();
  const double h = m.spacing();
  int act[2];
  const int na = active_nodes(m, c, act);
  const bool left_sing = (c == 0);
  const bool right_sing = (c == m.cell_count() - 1);

  auto tail = [&](double d) { return kernel_tail_integral(k, d, tail_tol); };
  auto bounded_tail = [&](double d) { return std::pow(d, 2.0 * k.s) * tail(d); };

  for (int a = 0; a < na; ++a)
    for (int b = a; b < na; ++b) {
      double val = 0.0;
      // left tail term
      if (left_sing) {
        // only the first hat lives on cell 0 and phi_0(a + d) = d/h
        double sum = 0.0;
        for (int jn = 0; jn < R.jac_corner.size(); ++jn)
          sum += R.jac_corner.w[jn] * bounded_tail(h * R.jac_corner.t[jn]);
        val += std::pow(h, 1.0 - 2.0 * k.s) * sum;
      } else {
        for (int it = 0; it < R.gl.size(); ++it) {
          const double x = m.cell_left(c) + h * R.gl.t[it];
          val += R.gl.w[it] * h * hat_value(m, act[a], x) * hat_value(m, act[b], x) *
                 tail(x - m.a);
        }
      }
      // right tail term, mirrored
      if (right_sing) {
        double sum = 0.0;
        for (int jn = 0; jn < R.jac_corner.size(); ++jn)
          sum += R.jac_corner.w[jn] * bounded_tail(h * R.jac_corner.t[jn]);
        val += std::pow(h, 1.0 - 2.0 * k.s) * sum;
      } else {
        for (int it = 0; it < R.gl.size(); ++it) {
          const double x = m.cell_left(c) + h * R.gl.t[it];
          val += R.gl.w[it] * h * hat_value(m, act[a], x) * hat_value(m, act[b], x) *
                 tail(m.b - x);
        }
      }
      out.push_back({act[a], act[b], 2.0 * val});
    }
}

inline Eigen::MatrixXd assemble_stiffness_raw(const Kernel& k, const Mesh& m, int gq,
                                              int jq, double tail_tol) {
  const int n = m.n;
  const int nc = m.cell_count();
  const StiffnessRules R = make_stiffness_rules(k, gq, jq);

  // fixed chunking over the leading cell keeps the accumulation order
  // independent of the worker count
  const int chunks = std::min(nc, 64);
  std::vector<Eigen::MatrixXd> partial(chunks, Eigen::MatrixXd::Zero(n, n));
  parallel_chunks(nc, chunks, [&](int chunk, int lo, int hi) {
    std::vector<LocalEntry> loc;
    for (int p = lo; p < hi; ++p) {
      for (int q = p; q < nc; ++q) {
        cell_pair_local(k, m, p, q, R, loc);
        const double f = (q == p) ? 1.0 : 2.0;
        for (const auto& e : loc) partial[chunk](e.i, e.j) += f * e.value;
      }
      cell_exterior_local(k, m, p, R, tail_tol, loc);
      for (const auto& e : loc) partial[chunk](e.i, e.j) += e.value;
    }
  });

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (const auto& P : partial) A += P;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) A(j, i) = A(i, j);
  return A;
}

// Single entry assembled from scratch; used by the sampled quadrature
// self-check. Entry (i, j) receives interaction contributions from every cell
// pair meeting supp phi_i and supp phi_j, which for a fixed entry is the O(n)
// family {cells of i or j} x {all cells}.
inline double assemble_stiffness_entry(const Kernel& k, const Mesh& m, int i, int j,
                                       int gq, int jq, double tail_tol) {
  const StiffnessRules R = make_stiffness_rules(k, gq, jq);
  const int lo = std::min(i, j), hi = std::max(i, j);
  std::set<std::pair<int, int>> pairs;
  for (int c : {lo, lo + 1, hi, hi + 1})
    for (int d = 0; d < m.cell_count(); ++d)
      pairs.insert({std::min(c, d), std::max(c, d)});

  std::vector<LocalEntry> loc;
  double v = 0.0;
  for (const auto& [p, q] : pairs) {
    cell_pair_local(k, m, p, q, R, loc);
    const double f = (q == p) ? 1.0 : 2.0;
    for (const auto& e : loc)
      if (e.i == lo && e.j == hi) v += f * e.value;
  }
  if (hi - lo <= 1) {
    // shared support cells carry the exterior term
    for (int c = hi; c <= lo + 1; ++c) {
      cell_exterior_local(k, m, c, R, tail_tol, loc);
      for (const auto& e : loc)
        if (e.i == lo && e.j == hi) v += e.value;
    }
  }
  return v;
}

}  // namespace detail

struct StiffnessSelfCheck {
  double max_drift = 0.0;
  int worst_i = -1;
  int worst_j = -1;
};

/// Relative entry drift between the configured rule and the rule with doubled
/// points. Full matrix for n <= 32, a seeded sample of entries otherwise.
inline StiffnessSelfCheck stiffness_quadrature_drift(const Kernel& k, const Mesh& m,
                                                     const QuadratureSettings& qs = {}) {
  StiffnessSelfCheck res;
  auto record = [&](int i, int j, double v1, double v2) {
    const double denom = std::max(std::abs(v1), std::abs(v2));
    const double drift = denom == 0.0 ? 0.0 : std::abs(v1 - v2) / denom;
    if (drift > res.max_drift) {
      res.max_drift = drift;
      res.worst_i = i;
      res.worst_j = j;
    }
  };
  if (m.n <= 32) {
    const Eigen::MatrixXd A1 =
        detail::assemble_stiffness_raw(k, m, qs.gauss_points, qs.jacobi_points, qs.tail_tol);
    const Eigen::MatrixXd A2 = detail::assemble_stiffness_raw(
        k, m, 2 * qs.gauss_points, 2 * qs.jacobi_points, qs.tail_tol);
    for (int i = 0; i < m.n; ++i)
      for (int j = i; j < m.n; ++j) record(i, j, A1(i, j), A2(i, j));
  } else {
    std::mt19937_64 rng(qs.self_check_seed);
    std::uniform_int_distribution<int> pick(0, m.n - 1);
    for (int t = 0; t < qs.self_check_samples; ++t) {
      int i = pick(rng), j = pick(rng);
      if (i > j) std::swap(i, j);
      const double v1 = detail::assemble_stiffness_entry(k, m, i, j, qs.gauss_points,
                                                         qs.jacobi_points, qs.tail_tol);
      const double v2 = detail::assemble_stiffness_entry(
          k, m, i, j, 2 * qs.gauss_points, 2 * qs.jacobi_points, qs.tail_tol);
      record(i, j, v1, v2);
    }
  }
  return res;
}

/// Stiffness matrix of the nonlocal form: A_ij is the double integral of
/// (phi_i(x)-phi_i(y))(phi_j(x)-phi_j(y)) K(x-y) over the plane, with the hats
/// extended by zero outside (a, b). Rejects kernels that fail hypothesis
/// validation and, by default, runs the factor-2 quadrature self-check.
inline Eigen::MatrixXd assemble_stiffness(const Kernel& k, const Mesh& m,
                                          const QuadratureSettings& qs = {}) {
  const KernelValidationReport rep = validate_kernel(k);
  if (!rep.passed())
    throw std::invalid_argument("assemble_stiffness: kernel rejected (" +
                                rep.failure_summary() + ")");
  Eigen::MatrixXd A =
      detail::assemble_stiffness_raw(k, m, qs.gauss_points, qs.jacobi_points, qs.tail_tol);
  if (qs.self_check) {
    const StiffnessSelfCheck chk = stiffness_quadrature_drift(k, m, qs);
    if (chk.max_drift > qs.self_check_tol)
      throw std::runtime_error(
          "assemble_stiffness: quadrature self-check failed at entry (" +
          std::to_string(chk.worst_i) + ", " + std::to_string(chk.worst_j) +
          "), relative drift " + std::to_string(chk.max_drift));
  }
  return A;
}

/// Weight form int rho phi_i phi_j: exact integration of the cellwise-constant
/// weight against products of hats. Cell c joins nodes c-1 and c with the
/// local block rho_c * h * [[1/3, 1/6], [1/6, 1/3]].
inline Eigen::MatrixXd assemble_weight(const Weight& w, const Mesh& m) {
  if (static_cast<int>(w.cells.size()) != m.cell_count())
    throw std::invalid_argument("assemble_weight: weight defined on a different mesh");
  const int n = m.n;
  const double h = m.spacing();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  for (int c = 0; c < m.cell_count(); ++c) {
    const double rc = w.cells[c];
    const int L = c - 1, Rn = c;
    if (L >= 0) B(L, L) += rc * h / 3.0;
    if (Rn <= n - 1) B(Rn, Rn) += rc * h / 3.0;
    if (L >= 0 && Rn <= n - 1) {
      B(L, Rn) += rc * h / 6.0;
      B(Rn, L) += rc * h / 6.0;
    }
  }
  return B;
}

/// Diagonal (row-sum lumped) weight form: node i collects h/2 from each of its
/// two cells. Used by decoupled surrogate pencils, where the consistent form
/// would couple across a block interface through the shared cell.
inline Eigen::MatrixXd assemble_weight_lumped(const Weight& w, const Mesh& m) {
  if (static_cast<int>(w.cells.size()) != m.cell_count())
    throw std::invalid_argument("assemble_weight_lumped: weight defined on a different mesh");
  const int n = m.n;
  const double h = m.spacing();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) B(i, i) = 0.5 * h * (w.cells[i] + w.cells[i + 1]);
  return B;
}

}  // namespace nlspec
