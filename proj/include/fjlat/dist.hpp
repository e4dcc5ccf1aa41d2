#pragma once

// Exponential order-statistic building blocks for the fork-join access model:
// survival functions and exact moments of the service-type family, obtained by
// binomial expansion into sums of exp(-mu*l*s) terms (no quadrature).
//
// Alternating expansions are summed with compensated accumulation; r*t > 60 is
// rejected because the cancellation there exceeds double precision.

#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "fjlat/errors.hpp"
#include "fjlat/stats.hpp"

namespace fjlat {

struct Moments {
  double mean = 0.0;
  double second = 0.0;  // E[X^2], so second >= mean^2
};

// Occupancy vector (nu_0, ..., nu_{r-1}): nu_d groups saw d early departures.
// r is the vector length and t its coordinate sum.
struct ServiceTypeVector {
  std::vector<int> nu;

  int r() const { return static_cast<int>(nu.size()); }
  int t() const { return std::accumulate(nu.begin(), nu.end(), 0); }
  bool operator==(const ServiceTypeVector& o) const { return nu == o.nu; }
};

inline void validate_type(const ServiceTypeVector& v, int r, int t) {
  if (v.r() != r)
    throw invalid_parameter_error("service type: length != r");
  for (int x : v.nu)
    if (x < 0) throw invalid_parameter_error("service type: negative entry");
  if (v.t() != t)
    throw invalid_parameter_error("service type: sum(nu) != t");
}

inline ServiceTypeVector slowest_type(int r, int t) {
  ServiceTypeVector v{std::vector<int>(r, 0)};
  v.nu[0] = t;
  return v;
}

inline ServiceTypeVector fastest_type(int r, int t) {
  ServiceTypeVector v{std::vector<int>(r, 0)};
  v.nu[r - 1] = t;
  return v;
}

// beta(x,y) = Gamma(x)Gamma(y)/Gamma(x+y), via log-gamma.
inline double beta_fn(double x, double y) {
  if (!(x > 0.0) || !(y > 0.0))
    throw invalid_parameter_error("beta_fn: arguments must be positive");
  return std::exp(std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y));
}

// Pr{T > s} for one request served by a systematic server and t groups of r:
// exp(-mu s) * (1 - (1 - exp(-mu s))^r)^t. Also the slowest-type survival.
inline double avail_survival(double s, int r, int t, double mu) {
  if (r < 1 || t < 0 || !(mu > 0.0) || s < 0.0)
    throw invalid_parameter_error("avail_survival: need s>=0, r>=1, t>=0, mu>0");
  double u = std::exp(-mu * s);
  return u * std::pow(1.0 - std::pow(1.0 - u, r), t);
}

// Pr{S_nu > s} = exp(-mu s) * prod_d (1 - (1 - exp(-mu s))^{r-d})^{nu_d}.
inline double type_survival(const ServiceTypeVector& nu, double s, double mu) {
  int r = nu.r();
  if (r < 1) throw invalid_parameter_error("type_survival: empty type vector");
  for (int x : nu.nu)
    if (x < 0) throw invalid_parameter_error("type_survival: negative entry");
  if (!(mu > 0.0) || s < 0.0)
    throw invalid_parameter_error("type_survival: need s>=0, mu>0");
  double u = std::exp(-mu * s);
  double value = u;
  for (int d = 0; d < r; ++d) {
    if (nu.nu[d] == 0) continue;
    value *= std::pow(1.0 - std::pow(1.0 - u, r - d), nu.nu[d]);
  }
  return value;
}

namespace detail {

// Coefficients of Pr{S_nu > s} as a polynomial in u = exp(-mu s).
inline std::vector<double> survival_poly(const ServiceTypeVector& nu) {
  int r = nu.r();
  std::vector<double> poly{0.0, 1.0};  // the leading factor u
  for (int d = 0; d < r; ++d) {
    if (nu.nu[d] == 0) continue;
    int e = r - d;
    // q(u) = 1 - (1-u)^e has q[m] = (-1)^{m+1} C(e,m), m = 1..e.
    std::vector<double> q(e + 1, 0.0);
    double binom = 1.0;
    for (int m = 1; m <= e; ++m) {
      binom = binom * (e - m + 1) / m;
      q[m] = ((m % 2) ? binom : -binom);
    }
    for (int rep = 0; rep < nu.nu[d]; ++rep) {
      std::vector<double> prod(poly.size() + q.size() - 1, 0.0);
      for (std::size_t i = 0; i < poly.size(); ++i) {
        if (poly[i] == 0.0) continue;
        for (std::size_t j = 1; j < q.size(); ++j)
          prod[i + j] += poly[i] * q[j];
      }
      poly = std::move(prod);
    }
  }
  return poly;
}

inline void check_expansion_size(int r, int t, const char* where) {
  if (r * t > 60)
    throw invalid_parameter_error(std::string(where) +
                                  ": r*t > 60 loses precision; rejected");
}

}  // namespace detail

// Exact moments by term-wise integration of the expansion:
// E[S] = sum_l c_l/(mu l), E[S^2] = sum_l 2 c_l/(mu l)^2.
inline Moments type_moments(const ServiceTypeVector& nu, double mu) {
  int r = nu.r();
  if (r < 1) throw invalid_parameter_error("type_moments: empty type vector");
  if (!(mu > 0.0)) throw invalid_parameter_error("type_moments: need mu > 0");
  for (int x : nu.nu)
    if (x < 0) throw invalid_parameter_error("type_moments: negative entry");
  detail::check_expansion_size(r, nu.t(), "type_moments");
  auto poly = detail::survival_poly(nu);
  CompensatedSum mean, second;
  for (std::size_t l = 1; l < poly.size(); ++l) {
    if (poly[l] == 0.0) continue;
    mean.add(poly[l] / (mu * l));
    second.add(2.0 * poly[l] / ((mu * l) * (mu * l)));
  }
  return {mean.value(), second.value()};
}

// E[S_slowest^2] via the double binomial sum
//   sum_j C(t,j)(-1)^j sum_l (-1)^l C(rj,l) 2/(mu^2 (l+1)^2).
inline double slowest_second_moment(int r, int t, double mu) {
  if (r < 1 || t < 0 || !(mu > 0.0))
    throw invalid_parameter_error("slowest_second_moment: need r>=1, t>=0, mu>0");
  detail::check_expansion_size(r, t, "slowest_second_moment");
  CompensatedSum total;
  double ctj = 1.0;  // C(t, j)
  for (int j = 0; j <= t; ++j) {
    CompensatedSum inner;
    double crl = 1.0;  // C(rj, l)
    for (int l = 0; l <= r * j; ++l) {
      double term = crl * 2.0 / (mu * mu * (l + 1.0) * (l + 1.0));
      inner.add((l % 2) ? -term : term);
      crl = crl * (r * j - l) / (l + 1.0);
    }
    total.add(((j % 2) ? -1.0 : 1.0) * ctj * inner.value());
    ctj = ctj * (t - j) / (j + 1.0);
  }
  return total.value();
}

// All compositions of t into r parts, descending lexicographic, so index 0 is
// the slowest type (t,0,...,0) and the last the fastest (0,...,0,t). For r=2
// index i is exactly the type-i of the locality-two analysis.
inline std::vector<ServiceTypeVector> enumerate_types(int r, int t) {
  if (r < 1 || t < 0)
    throw invalid_parameter_error("enumerate_types: need r>=1, t>=0");
  std::vector<ServiceTypeVector> out;
  std::vector<int> cur(r, 0);
  auto rec = [&](auto&& self, int pos, int left) -> void {
    if (pos == r - 1) {
      cur[pos] = left;
      out.push_back({cur});
      return;
    }
    for (int v = left; v >= 0; --v) {
      cur[pos] = v;
      self(self, pos + 1, left - v);
    }
  };
  rec(rec, 0, t);
  return out;
}

enum class TypeOrder { a_slower, b_slower, equal, incomparable };

// Stochastic comparison via suffix sums: with equal totals, moving mass to
// higher indices (more early departures) can only make service faster, so
// a is slower than b iff sum_{i>=j} a_i <= sum_{i>=j} b_i for every j >= 1.
inline TypeOrder type_partial_order(const ServiceTypeVector& a,
                                    const ServiceTypeVector& b) {
  if (a.r() != b.r() || a.t() != b.t())
    throw invalid_parameter_error("type_partial_order: (r,t) must match");
  int r = a.r();
  bool a_le = true, b_le = true;
  int sa = 0, sb = 0;
  for (int j = r - 1; j >= 1; --j) {
    sa += a.nu[j];
    sb += b.nu[j];
    if (sa > sb) a_le = false;
    if (sb > sa) b_le = false;
  }
  if (a_le && b_le) return TypeOrder::equal;
  if (a_le) return TypeOrder::a_slower;
  if (b_le) return TypeOrder::b_slower;
  return TypeOrder::incomparable;
}

}  // namespace fjlat
