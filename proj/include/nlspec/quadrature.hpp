#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace nlspec {

/// Nodes and weights of a quadrature rule on [0, 1].
struct Rule01 {
  std::vector<double> t;
  std::vector<double> w;
  int size() const { return static_cast<int>(t.size()); }
};

namespace detail {

// Gauss-Legendre nodes/weights on [-1,1], Newton iteration on the three-term
// recurrence. Nodes come out symmetric and sorted ascending.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-15) {
        // one clean evaluation at the converged node for the weight
        p1 = 1.0;
        p2 = 0.0;
        for (int j = 0; j < n; ++j) {
          const double p3 = p2;
          p2 = p1;
          p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
        }
        pp = n * (z * p1 - p2) / (z * z - 1.0);
        break;
      }
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

// Gauss-Jacobi nodes/weights on [-1,1] for the weight (1-x)^alf (1+x)^bet,
// alf, bet > -1. Newton iteration with the standard initial guesses; roots
// come out descending from +1.
inline void gauss_jacobi(int n, double alf, double bet,
                         std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw std::invalid_argument("gauss_jacobi: need at least one node");
  if (alf <= -1.0 || bet <= -1.0)
    throw std::invalid_argument("gauss_jacobi: exponents must exceed -1");
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const double alfbet = alf + bet;
  double a, b, c, p1 = 0, p2 = 0, p3, pp = 0, temp = 0, z = 0, z1;
  for (int i = 0; i < n; ++i) {
    if (i == 0) {
      const double an = alf / n, bn = bet / n;
      const double r1 = (1.0 + alf) * (2.78 / (4.0 + n * n) + 0.768 * an / n);
      const double r2 = 1.0 + 1.48 * an + 0.96 * bn + 0.452 * an * an + 0.83 * an * bn;
      z = 1.0 - r1 / r2;
    } else if (i == 1) {
      const double r1 = (4.1 + alf) / ((1.0 + alf) * (1.0 + 0.156 * alf));
      const double r2 = 1.0 + 0.06 * (n - 8.0) * (1.0 + 0.12 * alf) / n;
      const double r3 = 1.0 + 0.012 * bet * (1.0 + 0.25 * std::abs(alf)) / n;
      z -= (1.0 - z) * r1 * r2 * r3;
    } else if (i == 2) {
      const double r1 = (1.67 + 0.28 * alf) / (1.0 + 0.37 * alf);
      const double r2 = 1.0 + 0.22 * (n - 8.0) / n;
      const double r3 = 1.0 + 8.0 * bet / ((6.28 + bet) * n * n);
      z -= (x[0] - z) * r1 * r2 * r3;
    } else if (i == n - 2) {
      const double r1 = (1.0 + 0.235 * bet) / (0.766 + 0.119 * bet);
      const double r2 = 1.0 / (1.0 + 0.639 * (n - 4.0) / (1.0 + 0.71 * (n - 4.0)));
      const double r3 = 1.0 / (1.0 + 20.0 * alf / ((7.5 + alf) * n * n));
      z += (z - x[n - 4]) * r1 * r2 * r3;
    } else if (i == n - 1) {
      const double r1 = (1.0 + 0.37 * bet) / (1.67 + 0.28 * bet);
      const double r2 = 1.0 / (1.0 + 0.22 * (n - 8.0) / n);
      const double r3 = 1.0 / (1.0 + 8.0 * alf / ((6.28 + alf) * n * n));
      z += (z - x[n - 3]) * r1 * r2 * r3;
    } else {
      z = 3.0 * x[i - 1] - 3.0 * x[i - 2] + x[i - 3];
    }
    bool converged = false;
    for (int its = 0; its < 100; ++its) {
      temp = 2.0 + alfbet;
      p1 = (alf - bet + temp * z) / 2.0;
      p2 = 1.0;
      for (int j = 2; j <= n; ++j) {
        p3 = p2;
        p2 = p1;
        temp = 2.0 * j + alfbet;
        a = 2.0 * j * (j + alfbet) * (temp - 2.0);
        b = (temp - 1.0) * (alf * alf - bet * bet + temp * (temp - 2.0) * z);
        c = 2.0 * (j - 1.0 + alf) * (j - 1.0 + bet) * temp;
        p1 = (b * p2 - c * p3) / a;
      }
      pp = (n * (alf - bet - temp * z) * p1 + 2.0 * (n + alf) * (n + bet) * p2) /
           (temp * (1.0 - z * z));
      z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-14) {
        converged = true;
        break;
      }
    }
    if (!converged) throw std::runtime_error("gauss_jacobi: Newton iteration stalled");
    // refresh the recurrence values at the accepted root
    temp = 2.0 + alfbet;
    p1 = (alf - bet + temp * z) / 2.0;
    p2 = 1.0;
    for (int j = 2; j <= n; ++j) {
      p3 = p2;
      p2 = p1;
      temp = 2.0 * j + alfbet;
      a = 2.0 * j * (j + alfbet) * (temp - 2.0);
      b = (temp - 1.0) * (alf * alf - bet * bet + temp * (temp - 2.0) * z);
      c = 2.0 * (j - 1.0 + alf) * (j - 1.0 + bet) * temp;
      p1 = (b * p2 - c * p3) / a;
    }
    pp = (n * (alf - bet - temp * z) * p1 + 2.0 * (n + alf) * (n + bet) * p2) /
         (temp * (1.0 - z * z));
    x[i] = z;
    w[i] = std::exp(std::lgamma(alf + n) + std::lgamma(bet + n) -
                    std::lgamma(n + 1.0) - std::lgamma(n + alfbet + 1.0)) *
           temp * std::pow(2.0, alfbet) / (pp * p2);
  }
}

}  // namespace detail

/// Gauss-Legendre rule mapped to [0,1]: sum w_i f(t_i) ~ int_0^1 f(t) dt.
inline Rule01 gauss_rule_01(int n) {
  std::vector<double> x, w;
  detail::gauss_legendre(n, x, w);
  Rule01 r;
  r.t.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    r.t[i] = 0.5 * (x[i] + 1.0);
    r.w[i] = 0.5 * w[i];
  }
  return r;
}

/// Gauss-Jacobi rule on [0,1] with the endpoint factor absorbed into the
/// weights: sum w_i f(t_i) ~ int_0^1 t^beta f(t) dt, beta > -1. Exact for
/// polynomial f up to degree 2n-1.
inline Rule01 jacobi_rule_01(int n, double beta) {
  std::vector<double> x, w;
  detail::gauss_jacobi(n, 0.0, beta, x, w);
  Rule01 r;
  r.t.resize(n);
  r.w.resize(n);
  const double scale = std::pow(2.0, -beta - 1.0);
  for (int i = 0; i < n; ++i) {
    r.t[i] = 0.5 * (x[i] + 1.0);
    r.w[i] = scale * w[i];
  }
  return r;
}

}  // namespace nlspec
