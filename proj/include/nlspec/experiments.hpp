#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlspec/assembly.hpp"
#include "nlspec/pencil.hpp"

namespace nlspec {

/// Cells on which a nodal vector is below tau * max|v|: a cell counts when
/// both of its interior endpoint values do (boundary cells have one).
inline std::vector<int> small_cells(const Eigen::VectorXd& nodal, const Mesh& m, double tau) {
  const double gmax = nodal.cwiseAbs().maxCoeff();
  const double thr = tau * gmax;
  std::vector<int> cells;
  for (int c = 0; c < m.cell_count(); ++c) {
    const int left = c - 1, right = c;
    bool small = true;
    if (left >= 0 && left < m.n) small = small && std::abs(nodal(left)) <= thr;
    if (right >= 0 && right < m.n) small = small && std::abs(nodal(right)) <= thr;
    if (small) cells.push_back(c);
  }
  return cells;
}

// ---------------------------------------------------------------------------
// eigenvalue continuity in the weight

enum class PerturbationMode { UniformShift, RandomCells };

inline const char* to_string(PerturbationMode m) {
  return m == PerturbationMode::UniformShift ? "uniform-shift" : "random-cells";
}

struct ContinuityRow {
  double eps = 0.0;
  int k = 0;
  double mu_base = 0.0;
  double mu_perturbed = 0.0;
  double deviation = 0.0;  // |mu_k(rho_eps) - mu_k(rho)|
  double distance = 0.0;   // operator distance between the weight forms
  double slack = 0.0;      // distance - deviation, expected >= -slack_tol
};

struct ContinuityReport {
  PerturbationMode mode{};
  std::vector<ContinuityRow> rows;
  std::vector<int> skipped_steps;  // eps entries whose shifted weight vanished
  bool slack_ok = true;
  bool shrink_checked = false;  // set when eps_list decreases in magnitude with one sign
  bool shrink_ok = true;
  double worst_slack = std::numeric_limits<double>::infinity();

  static constexpr double slack_tol = 1e-10;
  static constexpr double shrink_tol = 1e-12;
};

/// Perturbs the weight by eps (everywhere, or on a seeded random half of the
/// cells), re-solves, and tabulates per-index reciprocal deviations against
/// the operator distance. Along a same-sign eps list of decreasing magnitude
/// the deviations must also shrink monotonically.
inline ContinuityReport continuity_sweep(const Kernel& kernel, const Mesh& mesh,
                                         const Weight& rho, const std::vector<double>& eps_list,
                                         PerturbationMode mode, int kmax, std::uint64_t seed,
                                         const QuadratureSettings& qs = {}) {
  if (eps_list.empty()) throw std::invalid_argument("continuity_sweep: empty eps list");
  for (double e : eps_list)
    if (e == 0.0) throw std::invalid_argument("continuity_sweep: eps entries must be nonzero");
  if (kmax < 1) throw std::invalid_argument("continuity_sweep: kmax must be positive");
  if (!rho.has_positive_part() && !rho.has_negative_part())
    throw std::invalid_argument("continuity_sweep: weight identically zero");

  const Eigen::MatrixXd A = assemble_stiffness(kernel, mesh, qs);
  const Pencil base(A, assemble_weight(rho, mesh));
  const Spectrum S0 = solve_spectrum(base);

  std::vector<int> subset;
  if (mode == PerturbationMode::RandomCells) {
    std::vector<int> idx(mesh.cell_count());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    subset.assign(idx.begin(), idx.begin() + mesh.cell_count() / 2);
    std::sort(subset.begin(), subset.end());
  }

  ContinuityReport rep;
  rep.mode = mode;
  // deviations per index per accepted step, for the shrink check
  std::map<int, std::vector<double>> devs;

  for (std::size_t step = 0; step < eps_list.size(); ++step) {
    const double eps = eps_list[step];
    const Weight shifted = mode == PerturbationMode::UniformShift
                               ? rho.shifted(eps)
                               : rho.shifted_on(subset, eps);
    if (shifted.is_zero()) {
      rep.skipped_steps.push_back(static_cast<int>(step));
      continue;
    }
    const Pencil pert(A, assemble_weight(shifted, mesh));
    const double dist = operator_distance(base, pert);
    const Spectrum S1 = solve_spectrum(pert);
    for (int k = -kmax; k <= kmax; ++k) {
      if (k == 0 || !S0.has_index(k) || !S1.has_index(k)) continue;
      ContinuityRow row;
      row.eps = eps;
      row.k = k;
      row.mu_base = S0.mu(k);
      row.mu_perturbed = S1.mu(k);
      row.deviation = std::abs(row.mu_perturbed - row.mu_base);
      row.distance = dist;
      row.slack = row.distance - row.deviation;
      rep.worst_slack = std::min(rep.worst_slack, row.slack);
      if (row.slack < -ContinuityReport::slack_tol) rep.slack_ok = false;
      rep.rows.push_back(row);
      devs[k].push_back(row.deviation);
    }
  }

  bool decreasing = eps_list.size() >= 2;
  bool same_sign = true;
  for (std::size_t i = 0; i + 1 < eps_list.size(); ++i) {
    if (!(std::abs(eps_list[i + 1]) < std::abs(eps_list[i]))) decreasing = false;
    if (eps_list[i] * eps_list[i + 1] < 0.0) same_sign = false;
  }
  if (decreasing && same_sign && rep.skipped_steps.empty()) {
    rep.shrink_checked = true;
    for (const auto& [k, d] : devs)
      for (std::size_t i = 0; i + 1 < d.size(); ++i)
        if (d[i + 1] > d[i] + ContinuityReport::shrink_tol) rep.shrink_ok = false;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// monotonicity in the weight

struct MonotonicityRow {
  int k = 0;
  double lambda_base = 0.0;     // lambda_k(rho)
  double lambda_shifted = 0.0;  // lambda_k(rho_tilde)
  double gap = 0.0;             // lambda_base - lambda_shifted, >= 0 expected
  bool strict = false;
  double zero_fraction = 0.0;  // small cells of e_k(rho) within supp(rho_tilde - rho)
};

struct MonotonicityReport {
  std::vector<MonotonicityRow> rows;
  bool weak_ok = true;
  double worst_gap = std::numeric_limits<double>::infinity();

  static constexpr double weak_tol = 1e-10;
  static constexpr double strict_rel_tol = 1e-9;
};

/// Compares the spectra of rho <= rho_tilde (cellwise, not identical): the gap
/// lambda_k(rho) - lambda_k(rho_tilde) must be nonnegative on every admissible
/// index, and the strict flag records gaps above the relative threshold,
/// alongside the fraction of the perturbed support where e_k(rho) vanishes
/// discretely.
inline MonotonicityReport compare_weights(const Kernel& kernel, const Mesh& mesh,
                                          const Weight& rho, const Weight& rho_tilde,
                                          int kmax, double zero_tau = 1e-6,
                                          const QuadratureSettings& qs = {}) {
  if (rho.cells.size() != rho_tilde.cells.size() ||
      static_cast<int>(rho.cells.size()) != mesh.cell_count())
    throw std::invalid_argument("compare_weights: weights defined on a different mesh");
  if (kmax < 1) throw std::invalid_argument("compare_weights: kmax must be positive");
  double max_diff = 0.0;
  std::vector<int> support;
  for (int c = 0; c < mesh.cell_count(); ++c) {
    const double d = rho_tilde.cells[c] - rho.cells[c];
    if (d < 0.0) throw std::invalid_argument("weights not comparable or equal");
    if (d > 0.0) support.push_back(c);
    max_diff = std::max(max_diff, d);
  }
  if (max_diff == 0.0) throw std::invalid_argument("weights not comparable or equal");

  const Eigen::MatrixXd A = assemble_stiffness(kernel, mesh, qs);
  const Spectrum S0 = solve_spectrum(Pencil(A, assemble_weight(rho, mesh)));
  const Spectrum S1 = solve_spectrum(Pencil(A, assemble_weight(rho_tilde, mesh)));

  MonotonicityReport rep;
  auto add_rows = [&](int sign) {
    for (int j = 1; j <= kmax; ++j) {
      const int k = sign * j;
      if (!S0.has_index(k) || !S1.has_index(k)) continue;
      MonotonicityRow row;
      row.k = k;
      row.lambda_base = S0.lambda(k);
      row.lambda_shifted = S1.lambda(k);
      row.gap = row.lambda_base - row.lambda_shifted;
      row.strict =
          row.gap > MonotonicityReport::strict_rel_tol * std::max(1.0, std::abs(row.lambda_base));
      const std::vector<int> zc = small_cells(S0.eigenvector(k), mesh, zero_tau);
      int inside = 0;
      for (int c : zc)
        if (std::binary_search(support.begin(), support.end(), c)) ++inside;
      row.zero_fraction = support.empty() ? 0.0 : static_cast<double>(inside) / support.size();
      rep.worst_gap = std::min(rep.worst_gap, row.gap);
      if (row.gap < -MonotonicityReport::weak_tol) rep.weak_ok = false;
      rep.rows.push_back(row);
    }
  };
  // rho <= rho_tilde: a positive part of rho forces one in rho_tilde, and a
  // negative part of rho_tilde forces one in rho, so each branch is shared
  if (rho.has_positive_part()) add_rows(+1);
  if (rho_tilde.has_negative_part()) add_rows(-1);
  return rep;
}

// ---------------------------------------------------------------------------
// discrete zero sets

enum class ZeroSetClass { Nonvanishing, PositiveMeasure, OpenSet };

inline const char* to_string(ZeroSetClass c) {
  switch (c) {
    case ZeroSetClass::Nonvanishing: return "nonvanishing";
    case ZeroSetClass::PositiveMeasure: return "positive-measure zero set";
    case ZeroSetClass::OpenSet: return "open zero set";
  }
  return "?";
}

struct ZeroSetReport {
  int k = 0;
  double tau = 0.0;
  std::vector<int> zero_cells;
  double measure = 0.0;  // cell count * h
  ZeroSetClass classification = ZeroSetClass::Nonvanishing;
};

/// Tolerance-relative zero set of the k-th eigenfunction. Classification
/// convention: "open zero set" needs a run of at least two flagged cells that
/// stays clear of the boundary cells (eigenfunctions decay at the boundary
/// anyway, so boundary-touching smallness only evidences measure, not an
/// interior plateau).
inline ZeroSetReport zero_set(const Spectrum& s, const Mesh& m, int k, double tau) {
  if (!(tau > 0.0 && tau <= 1.0))
    throw std::invalid_argument("zero_set: tau must lie in (0, 1]");
  ZeroSetReport rep;
  rep.k = k;
  rep.tau = tau;
  rep.zero_cells = small_cells(s.eigenvector(k), m, tau);
  rep.measure = rep.zero_cells.size() * m.spacing();

  if (rep.zero_cells.empty()) {
    rep.classification = ZeroSetClass::Nonvanishing;
    return rep;
  }
  rep.classification = ZeroSetClass::PositiveMeasure;
  int run = 0;
  int run_start = -1;
  auto interior_run = [&](int start, int len) {
    return len >= 2 && start > 0 && start + len - 1 < m.cell_count() - 1;
  };
  for (std::size_t idx = 0; idx < rep.zero_cells.size(); ++idx) {
    if (idx > 0 && rep.zero_cells[idx] == rep.zero_cells[idx - 1] + 1) {
      ++run;
    } else {
      if (run_start >= 0 && interior_run(run_start, run)) rep.classification = ZeroSetClass::OpenSet;
      run_start = rep.zero_cells[idx];
      run = 1;
    }
  }
  if (run_start >= 0 && interior_run(run_start, run)) rep.classification = ZeroSetClass::OpenSet;
  return rep;
}

// ---------------------------------------------------------------------------
// weight edit on an eigenfunction's zero set

enum class WeightForm { Consistent, Lumped };

inline Eigen::MatrixXd build_weight_form(const Weight& w, const Mesh& m, WeightForm form) {
  return form == WeightForm::Consistent ? assemble_weight(w, m)
                                        : assemble_weight_lumped(w, m);
}

struct WeightEditReport {
  Weight rho_eps;
  std::vector<int> edited_cells;
  double lambda_base = 0.0;
  double lambda_edited = 0.0;
  double difference = 0.0;
  bool index_stable = false;
  bool weight_changed = false;
  double coupling_residual = 0.0;  // max entry of (B(rho_eps) - B(rho)) e_k
  bool pass = false;

  static constexpr double equality_tol = 1e-10;
};

/// Edits the weight by eps on the discrete zero set of the k-th eigenfunction
/// and verifies that the k-th eigenvalue survives unchanged at the same branch
/// position. Preconditions follow the construction: eps must point away from
/// the branch (positive for k > 0, negative for k < 0), the target eigenvalue
/// must be simple within its branch, the zero set must be nonempty, and the
/// neighbouring eigenvalue must not cross after the edit.
inline WeightEditReport rev_construct(const Eigen::MatrixXd& stiffness, const Mesh& mesh,
                                      const Weight& rho, int k, double epsilon,
                                      double zero_tau, WeightForm form = WeightForm::Lumped) {
  if (k == 0) throw std::invalid_argument("rev_construct: index 0 is not used");
  if (epsilon == 0.0) throw std::invalid_argument("rev_construct: epsilon must be nonzero");
  if ((k > 0) != (epsilon > 0.0))
    throw std::invalid_argument(
        "rev_construct: epsilon sign must match the branch (positive for k > 0, negative for k < 0)");
  if (!(zero_tau > 0.0 && zero_tau <= 1.0))
    throw std::invalid_argument("rev_construct: zero_tau must lie in (0, 1]");

  const Pencil base(stiffness, build_weight_form(rho, mesh, form));
  const Spectrum S0 = solve_spectrum(base);
  if (!S0.has_index(k))
    throw std::invalid_argument("rev_construct: index k not present in the spectrum");

  const double lam = S0.lambda(k);
  const int next = k > 0 ? k + 1 : k - 1;
  if (S0.has_index(next)) {
    const double gap = k > 0 ? S0.lambda(next) - lam : lam - S0.lambda(next);
    if (gap <= 1e-9 * std::max(1.0, std::abs(lam)))
      throw std::runtime_error(
          "rev_construct: target eigenvalue is degenerate within its branch; "
          "the construction needs a spectral gap");
  }

  const Eigen::VectorXd e = S0.eigenvector(k);
  const std::vector<int> zc = small_cells(e, mesh, zero_tau);
  if (zc.empty())
    throw std::runtime_error(
        "rev_construct: eigenfunction has an empty discrete zero set at this "
        "tolerance; construction inapplicable");

  WeightEditReport rep;
  rep.edited_cells = zc;
  rep.rho_eps = rho.shifted_on(zc, epsilon);
  rep.lambda_base = lam;
  rep.weight_changed = true;

  const Eigen::MatrixXd B1 = build_weight_form(rep.rho_eps, mesh, form);
  rep.coupling_residual = ((B1 - base.B) * e).cwiseAbs().maxCoeff();

  const Spectrum S1 = solve_spectrum(Pencil(stiffness, B1));
  if (!S1.has_index(k))
    throw std::runtime_error("rev_construct: edited spectrum lost the target index");
  rep.lambda_edited = S1.lambda(k);
  rep.difference = std::abs(rep.lambda_edited - rep.lambda_base);

  if (S1.has_index(next)) {
    const bool crossed = k > 0 ? !(S1.lambda(next) > lam) : !(S1.lambda(next) < lam);
    if (crossed)
      throw std::runtime_error("rev_construct: eigenvalue crossing detected; reduce |epsilon|");
  }

  // the unchanged eigenvalue must keep its branch position
  const auto& lambdas = k > 0 ? S1.lambda_pos : S1.lambda_neg;
  int closest = 0;
  for (int i = 1; i < static_cast<int>(lambdas.size()); ++i)
    if (std::abs(lambdas[i] - lam) < std::abs(lambdas[closest] - lam)) closest = i;
  rep.index_stable = (closest == std::abs(k) - 1);

  rep.pass = rep.index_stable && rep.weight_changed &&
             rep.difference <= WeightEditReport::equality_tol;
  return rep;
}

}  // namespace nlspec
