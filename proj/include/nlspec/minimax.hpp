#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include "nlspec/pencil.hpp"

namespace nlspec {

/// Subspace of coefficient space with A-orthonormal basis columns.
struct Subspace {
  Eigen::MatrixXd basis;
  int dim() const { return static_cast<int>(basis.cols()); }
};

/// Modified Gram-Schmidt in the inner product of SPD A, with one
/// re-orthogonalization pass. Throws when the columns are numerically rank
/// deficient.
inline Subspace a_orthonormalize(const Eigen::MatrixXd& A, Eigen::MatrixXd V,
                                 double rank_tol = 1e-10) {
  const int n = static_cast<int>(V.rows());
  const int k = static_cast<int>(V.cols());
  Eigen::MatrixXd AQ(n, k);
  for (int j = 0; j < k; ++j) {
    Eigen::VectorXd v = V.col(j);
    const double scale0 = std::sqrt(v.dot(A * v));
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i < j; ++i) v -= AQ.col(i).dot(v) * V.col(i);
    const double nrm = std::sqrt(v.dot(A * v));
    if (!(nrm > rank_tol * std::max(1.0, scale0)))
      throw std::runtime_error("a_orthonormalize: rank-deficient basis");
    V.col(j) = v / nrm;
    AQ.col(j) = A * V.col(j);
  }
  return {std::move(V)};
}

/// A-orthogonal complement of an A-orthonormal subspace, built by extending
/// the basis with standard coordinate vectors.
inline Subspace a_complement(const Eigen::MatrixXd& A, const Subspace& F) {
  const int n = static_cast<int>(A.rows());
  const int m = F.dim();
  Eigen::MatrixXd Q(n, n), AQ(n, n);
  Q.leftCols(m) = F.basis;
  for (int i = 0; i < m; ++i) AQ.col(i) = A * Q.col(i);
  int got = m;
  for (int cand = 0; cand < n && got < n; ++cand) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(n, cand);
    const double scale0 = std::sqrt(A(cand, cand));
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i < got; ++i) v -= AQ.col(i).dot(v) * Q.col(i);
    const double nrm = std::sqrt(v.dot(A * v));
    if (nrm <= 1e-8 * scale0) continue;  // numerically inside the current span
    Q.col(got) = v / nrm;
    AQ.col(got) = A * Q.col(got);
    ++got;
  }
  if (got < n) throw std::runtime_error("a_complement: failed to complete the basis");
  return {Q.rightCols(n - m)};
}

/// Smallest and largest values of u^T B u over {u in F : u^T A u = 1}, i.e.
/// the extreme eigenvalues of the restricted form Q^T B Q. A basis that is
/// not A-orthonormal is re-orthonormalized first (rank deficiency throws).
inline std::pair<double, double> rayleigh_extrema(const Pencil& P, const Subspace& F) {
  if (F.dim() == 0)
    throw std::invalid_argument("rayleigh_extrema: empty subspace");
  Eigen::MatrixXd Q = F.basis;
  const Eigen::MatrixXd G = Q.transpose() * P.A * Q;
  if ((G - Eigen::MatrixXd::Identity(F.dim(), F.dim())).cwiseAbs().maxCoeff() > 1e-10)
    Q = a_orthonormalize(P.A, Q).basis;
  Eigen::MatrixXd M = Q.transpose() * P.B * Q;
  M = (0.5 * (M + M.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = es.eigenvalues();
  return {ev(0), ev(ev.size() - 1)};
}

enum class MinimaxFormula {
  PositiveSupInf,  // sup over k-dim subspaces of the restricted minimum
  PositiveInfSup,  // inf over (k-1)-dim subspaces of the complement maximum
  NegativeInfSup,  // inf over k-dim subspaces of the restricted maximum
  NegativeSupInf,  // sup over (k-1)-dim subspaces of the complement minimum
};

inline const char* to_string(MinimaxFormula f) {
  switch (f) {
    case MinimaxFormula::PositiveSupInf: return "positive_sup_inf";
    case MinimaxFormula::PositiveInfSup: return "positive_inf_sup";
    case MinimaxFormula::NegativeInfSup: return "negative_inf_sup";
    case MinimaxFormula::NegativeSupInf: return "negative_sup_inf";
  }
  return "?";
}

/// Sampled verification of one variational formula: random subspaces must stay
/// on one side of the target value mu_k (up to bound_tol) and the eigenvector
/// span must attain it (up to attain_tol). The two halves together witness the
/// equality that sampling alone cannot certify.
struct MinimaxReport {
  MinimaxFormula formula{};
  int k = 0;
  double target = 0.0;
  double worst_sample = 0.0;  // sampled value closest to (or past) the bound
  double witness = 0.0;       // value attained by the eigenvector span
  int samples = 0;
  double violation = 0.0;     // worst one-sided excess over the bound
  bool pass = false;

  static constexpr double bound_tol = 1e-9;
  static constexpr double attain_tol = 1e-8;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                              std::uint64_t c) {
  return splitmix64(splitmix64(splitmix64(seed ^ a) ^ b) ^ c);
}

inline Eigen::MatrixXd gaussian_matrix(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd M(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) M(i, j) = nd(rng);
  return M;
}

// Random A-orthonormal subspace; Gaussian rank deficiency has probability
// zero, but a deterministic redraw chain keeps the sampler total.
inline Subspace random_subspace(const Eigen::MatrixXd& A, int k, std::uint64_t seed) {
  const int n = static_cast<int>(A.rows());
  if (k == 0) return {Eigen::MatrixXd(n, 0)};
  for (int attempt = 0;; ++attempt) {
    try {
      return a_orthonormalize(A, gaussian_matrix(n, k, splitmix64(seed + attempt)));
    } catch (const std::runtime_error&) {
      if (attempt >= 8) throw;
    }
  }
}

}  // namespace detail

/// Verifies both variational characterizations of the k-th positive branch
/// value mu_k: (a) the restricted minimum over random k-dim subspaces never
/// exceeds mu_k, attained by the span of the first k eigenvectors; (b) the
/// complement maximum over random (k-1)-dim subspaces never drops below mu_k,
/// attained at the span of the first k-1 eigenvectors.
inline std::pair<MinimaxReport, MinimaxReport> verify_positive_branch(
    const Pencil& P, const Spectrum& S, int k, int samples, std::uint64_t seed) {
  if (k < 1 || k > S.positive_count())
    throw std::invalid_argument("verify_positive_branch: index k inadmissible");
  if (samples < 1) throw std::invalid_argument("verify_positive_branch: need samples >= 1");
  const double target = S.mu_pos[k - 1];

  MinimaxReport supinf;
  supinf.formula = MinimaxFormula::PositiveSupInf;
  supinf.k = k;
  supinf.target = target;
  supinf.samples = samples;
  double worst = -std::numeric_limits<double>::infinity();
  double viol = 0.0;
  for (int m = 0; m < samples; ++m) {
    const Subspace F = detail::random_subspace(P.A, k, detail::mix_seed(seed, 1, k, m));
    const double val = rayleigh_extrema(P, F).first;
    worst = std::max(worst, val);
    viol = std::max(viol, val - target);
  }
  supinf.worst_sample = worst;
  supinf.violation = viol;
  supinf.witness = rayleigh_extrema(P, {S.vectors_pos.leftCols(k)}).first;
  supinf.pass = viol <= MinimaxReport::bound_tol &&
                std::abs(supinf.witness - target) <= MinimaxReport::attain_tol;

  MinimaxReport infsup;
  infsup.formula = MinimaxFormula::PositiveInfSup;
  infsup.k = k;
  infsup.target = target;
  infsup.samples = samples;
  worst = std::numeric_limits<double>::infinity();
  viol = 0.0;
  for (int m = 0; m < samples; ++m) {
    const Subspace F = detail::random_subspace(P.A, k - 1, detail::mix_seed(seed, 2, k, m));
    const double val = rayleigh_extrema(P, a_complement(P.A, F)).second;
    worst = std::min(worst, val);
    viol = std::max(viol, target - val);
  }
  infsup.worst_sample = worst;
  infsup.violation = viol;
  infsup.witness =
      rayleigh_extrema(P, a_complement(P.A, {S.vectors_pos.leftCols(k - 1)})).second;
  infsup.pass = viol <= MinimaxReport::bound_tol &&
                std::abs(infsup.witness - target) <= MinimaxReport::attain_tol;
  return {supinf, infsup};
}

/// Mirror of verify_positive_branch for the k-th negative branch value
/// mu_{-k}: restricted maxima over random k-dim subspaces stay above it,
/// complement minima over random (k-1)-dim subspaces stay below it, and the
/// negative-branch eigenvector spans attain it.
inline std::pair<MinimaxReport, MinimaxReport> verify_negative_branch(
    const Pencil& P, const Spectrum& S, int k, int samples, std::uint64_t seed) {
  if (k < 1 || k > S.negative_count())
    throw std::invalid_argument("verify_negative_branch: index k inadmissible");
  if (samples < 1) throw std::invalid_argument("verify_negative_branch: need samples >= 1");
  const double target = S.mu_neg[k - 1];

  MinimaxReport infsup;
  infsup.formula = MinimaxFormula::NegativeInfSup;
  infsup.k = k;
  infsup.target = target;
  infsup.samples = samples;
  double worst = std::numeric_limits<double>::infinity();
  double viol = 0.0;
  for (int m = 0; m < samples; ++m) {
    const Subspace F = detail::random_subspace(P.A, k, detail::mix_seed(seed, 3, k, m));
    const double val = rayleigh_extrema(P, F).second;
    worst = std::min(worst, val);
    viol = std::max(viol, target - val);
  }
  infsup.worst_sample = worst;
  infsup.violation = viol;
  infsup.witness = rayleigh_extrema(P, {S.vectors_neg.leftCols(k)}).second;
  infsup.pass = viol <= MinimaxReport::bound_tol &&
                std::abs(infsup.witness - target) <= MinimaxReport::attain_tol;

  MinimaxReport supinf;
  supinf.formula = MinimaxFormula::NegativeSupInf;
  supinf.k = k;
  supinf.target = target;
  supinf.samples = samples;
  worst = -std::numeric_limits<double>::infinity();
  viol = 0.0;
  for (int m = 0; m < samples; ++m) {
    const Subspace F = detail::random_subspace(P.A, k - 1, detail::mix_seed(seed, 4, k, m));
    const double val = rayleigh_extrema(P, a_complement(P.A, F)).first;
    worst = std::max(worst, val);
    viol = std::max(viol, val - target);
  }
  supinf.worst_sample = worst;
  supinf.violation = viol;
  supinf.witness =
      rayleigh_extrema(P, a_complement(P.A, {S.vectors_neg.leftCols(k - 1)})).first;
  supinf.pass = viol <= MinimaxReport::bound_tol &&
                std::abs(supinf.witness - target) <= MinimaxReport::attain_tol;
  return {infsup, supinf};
}

}  // namespace nlspec
