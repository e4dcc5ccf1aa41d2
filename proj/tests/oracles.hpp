#pragma once

// Test-only oracles, kept independent of the implementation paths they check.

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

// Adaptive Simpson on [a, b].
inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol, int depth = 24) {
  auto simpson = [&](double lo, double hi) {
    return (hi - lo) / 6.0 * (f(lo) + 4.0 * f((lo + hi) / 2.0) + f(hi));
  };
  std::function<double(double, double, double, int)> rec =
      [&](double lo, double hi, double whole, int d) -> double {
    double mid = (lo + hi) / 2.0;
    double left = simpson(lo, mid), right = simpson(mid, hi);
    if (d <= 0 || std::abs(left + right - whole) < 15.0 * tol)
      return left + right + (left + right - whole) / 15.0;
    return rec(lo, mid, left, d - 1) + rec(mid, hi, right, d - 1);
  };
  return rec(a, b, simpson(a, b), depth);
}

// Integral of f over [0, inf) for integrands decaying like exp(-mu s).
// Panel-by-panel so the adaptive rule cannot be fooled by a coarse first pass
// sampling only the vanishing tail.
inline double integrate_tail(const std::function<double(double)>& f, double mu,
                             double tol = 1e-12) {
  double total = 0.0;
  int panels = 80;
  double width = 1.0 / mu;
  for (int k = 0; k < panels; ++k)
    total += adaptive_simpson(f, k * width, (k + 1) * width, tol / panels);
  return total;
}

// E[X] and E[X^2] from a survival function via quadrature.
inline double mean_from_survival(const std::function<double(double)>& surv,
                                 double mu) {
  return integrate_tail(surv, mu);
}

inline double second_from_survival(const std::function<double(double)>& surv,
                                   double mu) {
  return integrate_tail([&](double s) { return 2.0 * s * surv(s); }, mu);
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

// Upper bound of the mean download time as a closed-form double sum:
// eta + lambda * sum_j C(t,j)(-1)^j sum_l (-1)^l C(rj,l) (l+1)^{-2}
//           / (mu^2 (1 - lambda * eta)).
inline double sm_upper_closed_form(double lambda, int r, int t, double mu,
                                         double eta) {
  double outer = 0.0;
  for (int j = 0; j <= t; ++j) {
    double inner = 0.0;
    for (int l = 0; l <= r * j; ++l)
      inner += ((l % 2) ? -1.0 : 1.0) * binomial(r * j, l) / ((l + 1.0) * (l + 1.0));
    outer += ((j % 2) ? -1.0 : 1.0) * binomial(t, j) * inner;
  }
  return eta + lambda * outer / (mu * mu * (1.0 - lambda * eta));
}

// Closed form of the locality-two weight recursion, derived by hand:
// rho_0 = x/(t(1-x)) with x = lambda E[V] forces rho_i = 1 for i >= 1, so the
// normalized weights are (1-x, x/t, ..., x/t).
inline std::vector<double> approx_r2_weights_closed_form(double x, int t) {
  std::vector<double> w(t + 1, x / t);
  w[0] = 1.0 - x;
  return w;
}

// M/M/1 mean sojourn time.
inline double mm1_mean(double lambda, double rate) {
  return 1.0 / (rate - lambda);
}

}  // namespace oracle
