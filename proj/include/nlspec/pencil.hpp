#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlspec/mesh.hpp"

namespace nlspec {

/// Matrix pair (A, B): A symmetric positive definite (the energy inner
/// product), B symmetric and possibly indefinite (the weight form). Surrogate
/// pencils may carry any SPD A.
struct Pencil {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;

  Pencil(Eigen::MatrixXd A_, Eigen::MatrixXd B_) : A(std::move(A_)), B(std::move(B_)) {
    if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows())
      throw std::invalid_argument("Pencil: matrices must be square and of equal size");
    const double sa = A.cwiseAbs().maxCoeff();
    const double sb = B.cwiseAbs().maxCoeff();
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, sa) ||
        (B - B.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, sb))
      throw std::invalid_argument("Pencil: matrices must be symmetric");
  }
  int size() const { return static_cast<int>(A.rows()); }
};

/// Two-sided spectrum of A e = lambda B e, indexed k = 1, 2, ... on the
/// positive branch and k = -1, -2, ... on the negative branch. The auxiliary
/// values mu_k = 1/lambda_k are the eigenvalues of the reduced symmetric
/// matrix C = L^{-1} B L^{-T}; mu near zero (kernel of B) is counted in
/// zero_multiplicity and carries no eigenvalue of the pencil.
struct Spectrum {
  std::vector<double> mu_pos;       // descending: mu_1 >= mu_2 >= ... > 0
  std::vector<double> lambda_pos;   // ascending:  0 < lambda_1 <= lambda_2 <= ...
  std::vector<double> residual_pos; // relative residuals |A e - lambda B e| / |A e|
  Eigen::MatrixXd vectors_pos;      // columns are the branch eigenvectors

  std::vector<double> mu_neg;       // ascending: mu_{-1} <= mu_{-2} <= ... < 0
  std::vector<double> lambda_neg;   // descending: 0 > lambda_{-1} >= lambda_{-2} >= ...
  std::vector<double> residual_neg;
  Eigen::MatrixXd vectors_neg;

  int zero_multiplicity = 0;
  double zero_tol = 0.0;

  int positive_count() const { return static_cast<int>(mu_pos.size()); }
  int negative_count() const { return static_cast<int>(mu_neg.size()); }

  bool has_index(int k) const {
    if (k > 0) return k <= positive_count();
    if (k < 0) return -k <= negative_count();
    return false;
  }
  double lambda(int k) const { return branch(k, lambda_pos, lambda_neg); }
  double mu(int k) const { return branch(k, mu_pos, mu_neg); }
  double residual(int k) const { return branch(k, residual_pos, residual_neg); }
  Eigen::VectorXd eigenvector(int k) const {
    check_index(k);
    return k > 0 ? vectors_pos.col(k - 1) : vectors_neg.col(-k - 1);
  }

 private:
  void check_index(int k) const {
    if (k == 0) throw std::invalid_argument("Spectrum: index 0 is not used");
    if (!has_index(k))
      throw std::out_of_range("Spectrum: index " + std::to_string(k) +
                              " is not present in the computed branches");
  }
  double branch(int k, const std::vector<double>& pos, const std::vector<double>& neg) const {
    check_index(k);
    return k > 0 ? pos[k - 1] : neg[-k - 1];
  }
};

/// Solves the pencil by Cholesky reduction to C = L^{-1} B L^{-T} and a dense
/// symmetric eigendecomposition (deterministic given inputs). zero_tol < 0
/// requests the default 1e-12 * ||C||_2.
inline Spectrum solve_spectrum(const Pencil& P, double zero_tol = -1.0) {
  if (P.B.cwiseAbs().maxCoeff() == 0.0)
    throw std::invalid_argument("solve_spectrum: weight identically zero");
  Eigen::LLT<Eigen::MatrixXd> llt(P.A);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("solve_spectrum: stiffness not positive definite (Cholesky failed)");

  const int n = P.size();
  Eigen::MatrixXd C = llt.matrixL().solve(P.B);
  C = llt.matrixL().solve(C.transpose());
  C = (0.5 * (C + C.transpose())).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("solve_spectrum: eigendecomposition failed");
  const Eigen::VectorXd& mu = es.eigenvalues();  // ascending
  const double norm2 = std::max(std::abs(mu(0)), std::abs(mu(n - 1)));
  const double ztol = zero_tol >= 0.0 ? zero_tol : 1e-12 * norm2;

  Spectrum S;
  S.zero_tol = ztol;
  std::vector<int> pos, neg;
  for (int i = n - 1; i >= 0; --i)
    if (mu(i) > ztol) pos.push_back(i);  // descending mu
  for (int i = 0; i < n; ++i)
    if (mu(i) < -ztol) neg.push_back(i);  // ascending mu
  S.zero_multiplicity = n - static_cast<int>(pos.size() + neg.size());

  auto fill = [&](const std::vector<int>& idx, std::vector<double>& mus,
                  std::vector<double>& lambdas, std::vector<double>& residuals,
                  Eigen::MatrixXd& vecs) {
    const int m = static_cast<int>(idx.size());
    mus.resize(m);
    lambdas.resize(m);
    residuals.resize(m);
    vecs.resize(n, m);
    for (int c = 0; c < m; ++c) {
      const double muv = mu(idx[c]);
      mus[c] = muv;
      lambdas[c] = 1.0 / muv;
      const Eigen::VectorXd e = llt.matrixU().solve(es.eigenvectors().col(idx[c]));
      vecs.col(c) = e;
      const Eigen::VectorXd Ae = P.A * e;
      residuals[c] = (Ae - lambdas[c] * (P.B * e)).norm() / Ae.norm();
    }
  };
  fill(pos, S.mu_pos, S.lambda_pos, S.residual_pos, S.vectors_pos);
  fill(neg, S.mu_neg, S.lambda_neg, S.residual_neg, S.vectors_neg);
  return S;
}

/// Distance between the weight operators of two pencils sharing the same
/// stiffness: the spectral norm of L^{-1} (B1 - B2) L^{-T}.
inline double operator_distance(const Pencil& p1, const Pencil& p2) {
  if (p1.size() != p2.size() || (p1.A - p2.A).cwiseAbs().maxCoeff() != 0.0)
    throw std::invalid_argument("operator_distance: pencils must share the same stiffness");
  if ((p1.B - p2.B).cwiseAbs().maxCoeff() == 0.0) return 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(p1.A);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("operator_distance: stiffness not positive definite");
  Eigen::MatrixXd D = llt.matrixL().solve(p1.B - p2.B);
  D = llt.matrixL().solve(D.transpose());
  D = (0.5 * (D + D.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = es.eigenvalues();
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

/// Sign-rule report: k > 0 is admissible when the weight has a positive part,
/// k < 0 when it has a negative part. Flags disagreement between those flags
/// and the branches actually computed (possible on very coarse meshes, where
/// a sign-changing weight can fail to induce a matching form direction).
struct AdmissibilityReport {
  bool positive_admissible = false;
  bool negative_admissible = false;
  int positive_count = 0;
  int negative_count = 0;

  bool positive_consistent() const { return positive_admissible == (positive_count > 0); }
  bool negative_consistent() const { return negative_admissible == (negative_count > 0); }
  bool consistent() const { return positive_consistent() && negative_consistent(); }
};

inline AdmissibilityReport admissible_indices(const Weight& w, const Spectrum& s) {
  AdmissibilityReport r;
  r.positive_admissible = w.has_positive_part();
  r.negative_admissible = w.has_negative_part();
  r.positive_count = s.positive_count();
  r.negative_count = s.negative_count();
  return r;
}

/// Block-diagonal SPD stiffness made of decoupled second-difference blocks,
/// scale_i * tridiag(-1, 2, -1) / h. Distinct per-block scalings (default
/// 1, 2, 3, ...) keep the merged spectrum simple, which the weight-edit
/// construction needs for its spectral-gap side conditions.
inline Eigen::MatrixXd block_second_difference(const std::vector<int>& sizes, double h,
                                               std::vector<double> scales = {}) {
  if (sizes.empty()) throw std::invalid_argument("block_second_difference: no blocks");
  if (!(h > 0.0)) throw std::invalid_argument("block_second_difference: need h > 0");
  if (scales.empty())
    for (std::size_t i = 0; i < sizes.size(); ++i) scales.push_back(static_cast<double>(i + 1));
  if (scales.size() != sizes.size())
    throw std::invalid_argument("block_second_difference: one scale per block");
  int n = 0;
  for (int s : sizes) {
    if (s < 1) throw std::invalid_argument("block_second_difference: block sizes must be >= 1");
    n += s;
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  int off = 0;
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    const double c = scales[b] / h;
    for (int i = 0; i < sizes[b]; ++i) {
      A(off + i, off + i) = 2.0 * c;
      if (i + 1 < sizes[b]) {
        A(off + i, off + i + 1) = -c;
        A(off + i + 1, off + i) = -c;
      }
    }
    off += sizes[b];
  }
  return A;
}

}  // namespace nlspec
