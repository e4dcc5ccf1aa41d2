#pragma once

// Queueing-regime machinery: the Pollaczek-Khinchine pipeline, the download
// time bounds built from the Fast-Split-Merge / Split-Merge disciplines, the
// M/G/1 mixture approximations, and the high-traffic estimates for the
// locality-two / availability-one system with rates (gamma, alpha, beta).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fjlat/codes.hpp"
#include "fjlat/dist.hpp"
#include "fjlat/errors.hpp"
#include "fjlat/lowtraffic.hpp"

namespace fjlat {

struct Mg1Spec {
  double lambda = 0.0;
  Moments service;
};

// Mean sojourn time E[S] + lambda E[S^2] / (2 (1 - lambda E[S])).
inline double pk_mean(const Mg1Spec& spec) {
  if (!(spec.lambda >= 0.0))
    throw invalid_parameter_error("pk_mean: need lambda >= 0");
  double rho = spec.lambda * spec.service.mean;
  if (rho >= 1.0) throw instability_error("lambda*E[S] >= 1");
  return spec.service.mean +
         spec.lambda * spec.service.second / (2.0 * (1.0 - rho));
}

// Probabilities over enumerate_types(r, t), stored in enumeration order.
struct TypeFrequencies {
  int r = 1;
  int t = 0;
  std::vector<double> f;
};

inline void validate_frequencies(const TypeFrequencies& freqs) {
  auto types = enumerate_types(freqs.r, freqs.t);
  if (freqs.f.size() != types.size())
    throw invalid_parameter_error("TypeFrequencies: size != C(t+r-1, r-1)");
  double sum = 0.0;
  for (double fi : freqs.f) {
    if (fi < 0.0 || fi > 1.0)
      throw invalid_parameter_error("TypeFrequencies: entry outside [0,1]");
    sum += fi;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw invalid_parameter_error("TypeFrequencies: must sum to 1");
}

// Lower bound on Pr{T > x} under popularity-split arrivals:
// sum_i p_i exp(-((t+1)mu - p_i lambda) x).
inline double fjga_ccdf_lower(double x, double lambda,
                              const PopularityVector& p, int t, double mu) {
  validate_popularity(p);
  if (x < 0.0 || !(mu > 0.0) || t < 0 || !(lambda >= 0.0))
    throw invalid_parameter_error("fjga_ccdf_lower: bad arguments");
  double pmax = *std::max_element(p.p.begin(), p.p.end());
  if (lambda * pmax >= (t + 1) * mu)
    throw instability_error("lambda*max(p) >= (t+1)*mu");
  double value = 0.0;
  for (double pi : p.p)
    value += pi * std::exp(-((t + 1) * mu - pi * lambda) * x);
  return value;
}

// Lower bound on E[T]: sum_i p_i / ((t+1)mu - p_i lambda).
inline double fjga_mean_lower(double lambda, const PopularityVector& p, int t,
                              double mu) {
  validate_popularity(p);
  if (!(mu > 0.0) || t < 0 || !(lambda >= 0.0))
    throw invalid_parameter_error("fjga_mean_lower: bad arguments");
  double pmax = *std::max_element(p.p.begin(), p.p.end());
  if (lambda * pmax >= (t + 1) * mu)
    throw instability_error("lambda*max(p) >= (t+1)*mu");
  double value = 0.0;
  for (double pi : p.p) value += pi / ((t + 1) * mu - pi * lambda);
  return value;
}

inline Moments slowest_moments(int r, int t, double mu) {
  return {et_availability(r, t, mu), slowest_second_moment(r, t, mu)};
}

// Split-Merge upper bound: M/G/1 with every request served at the slowest type.
inline double sm_mean_upper(double lambda, int r, int t, double mu) {
  Moments slowest = slowest_moments(r, t, mu);
  if (lambda * slowest.mean >= 1.0)
    throw instability_error("lambda >= 1/eta");
  return pk_mean({lambda, slowest});
}

// Fast-Split-Merge lower bound: M/M/1 at the fastest aggregate rate (t+1)mu.
inline double fsm_mean_lower(double lambda, int t, double mu) {
  if (t < 0 || !(mu > 0.0) || !(lambda >= 0.0))
    throw invalid_parameter_error("fsm_mean_lower: bad arguments");
  if (lambda >= (t + 1) * mu) throw instability_error("lambda >= (t+1)*mu");
  return 1.0 / ((t + 1) * mu - lambda);
}

// M/G/1 approximation with service moments mixed over the type frequencies.
inline double approx_mixture_mean(const TypeFrequencies& freqs, double lambda,
                                  int r, int t, double mu) {
  if (freqs.r != r || freqs.t != t)
    throw invalid_parameter_error("approx_mixture_mean: (r,t) mismatch");
  validate_frequencies(freqs);
  auto types = enumerate_types(r, t);
  Moments mix;
  for (std::size_t i = 0; i < types.size(); ++i) {
    if (freqs.f[i] == 0.0) continue;
    Moments mi = type_moments(types[i], mu);
    mix.mean += freqs.f[i] * mi.mean;
    mix.second += freqs.f[i] * mi.second;
  }
  return pk_mean({lambda, mix});
}

struct ApproxR2Weights {
  std::vector<double> rho;     // rho_0 .. rho_{t-1}
  std::vector<double> weight;  // type-i mixture weights, i = 0..t
};

// Locality-two type-i moments: nu = (t-i, i).
inline Moments r2_type_moments(int i, int t, double mu) {
  ServiceTypeVector nu{{t - i, i}};
  return type_moments(nu, mu);
}

// Weight recursion of the locality-two M/G/1 approximation. rho_i is needed
// only for i <= t-1: the printed formula carries a (t-i) factor that vanishes
// at i = t and the mixture weights never use rho_t.
inline ApproxR2Weights approx_r2_weights(double lambda, int t, double mu) {
  if (t < 1 || !(mu > 0.0) || !(lambda > 0.0))
    throw invalid_parameter_error("approx_r2_weights: need t>=1, mu>0, lambda>0");
  double ev = 0.0;
  for (int i = 0; i <= t; ++i) ev += r2_type_moments(i, t, mu).mean;
  ev /= (t + 1.0);
  double x = lambda * ev;
  if (x >= 1.0)
    throw approximation_domain_error("approx_r2: lambda*E[V] >= 1");

  ApproxR2Weights w;
  w.rho.push_back(x / (t * (1.0 - x)));
  double prod = w.rho[0];       // prod_{l<=k} rho_l with k = i-1
  double sum_prods = w.rho[0];  // sum_{k=0}^{i-1} prod_{l<=k} rho_l
  for (int i = 1; i <= t - 1; ++i) {
    double num = 1.0 - (1.0 - x) * (1.0 + sum_prods);
    double den = (1.0 - x) * (t - i) * prod;
    double rho_i = num / den;
    if (!(rho_i >= 0.0) || !std::isfinite(rho_i))
      throw approximation_domain_error("approx_r2: rho left [0, inf)");
    w.rho.push_back(rho_i);
    prod *= rho_i;
    sum_prods += prod;
  }

  // weight_i proportional to prod_{j<i} rho_j
  std::vector<double> raw(t + 1, 1.0);
  for (int i = 1; i <= t; ++i) raw[i] = raw[i - 1] * w.rho[i - 1];
  double norm = 0.0;
  for (double v : raw) norm += v;
  for (double v : raw) w.weight.push_back(v / norm);
  return w;
}

// Approximation for E[T] in the locality-two system: PK of the rho-weighted
// type mixture.
inline double approx_r2_mean(double lambda, int t, double mu) {
  ApproxR2Weights w = approx_r2_weights(lambda, t, mu);
  Moments mix;
  for (int i = 0; i <= t; ++i) {
    Moments mi = r2_type_moments(i, t, mu);
    mix.mean += w.weight[i] * mi.mean;
    mix.second += w.weight[i] * mi.second;
  }
  return pk_mean({lambda, mix});
}

struct HighTrafficRates {
  double gamma = 1.0;  // systematic server
  double alpha = 1.0;  // first recovery server
  double beta = 1.0;   // second recovery server

  double nu_total() const { return gamma + alpha + beta; }
};

inline void validate_rates(const HighTrafficRates& rates) {
  if (!(rates.gamma > 0.0) || !(rates.alpha > 0.0) || !(rates.beta > 0.0))
    throw invalid_parameter_error("rates must be positive");
}

struct HighTrafficFractions {
  double f0_hat = 0.0;  // type-0 service starts
  double f1_hat = 0.0;  // type-1 service starts
  double ws_hat = 0.0;  // completions won by the systematic server
  double wr_hat = 0.0;  // completions won by the recovery group
};

// Saturated-system fractions for alpha = beta = mu:
//   f0 = ws = gamma*nu / (gamma*nu + 2 mu^2),  nu = gamma + 2 mu,
// and the complements for f1, wr (ws + wr = 1 fixes the 2 mu^2 numerator).
inline HighTrafficFractions hightraffic_fractions(const HighTrafficRates& rates) {
  validate_rates(rates);
  if (rates.alpha != rates.beta)
    throw invalid_parameter_error("hightraffic_fractions: needs alpha == beta");
  double mu = rates.alpha;
  double nu = rates.gamma + 2.0 * mu;
  double denom = rates.gamma * nu + 2.0 * mu * mu;
  double f0 = rates.gamma * nu / denom;
  return {f0, 1.0 - f0, f0, 1.0 - f0};
}

// Lower bounds on the stationary service moments of the (gamma, mu, mu)
// system: type-0/type-1 moments weighted by the saturated fractions.
inline Moments r2t1_service_moment_lb(double gamma, double mu) {
  if (!(gamma > 0.0) || !(mu > 0.0))
    throw invalid_parameter_error("r2t1_service_moment_lb: rates must be positive");
  HighTrafficFractions f = hightraffic_fractions({gamma, mu, mu});
  double es0 = 2.0 / (gamma + mu) - 1.0 / (gamma + 2.0 * mu);
  double es1 = 1.0 / (gamma + mu);
  double es0_sq = 4.0 / ((gamma + mu) * (gamma + mu)) -
                  2.0 / ((gamma + 2.0 * mu) * (gamma + 2.0 * mu));
  double es1_sq = 2.0 / ((gamma + mu) * (gamma + mu));
  return {f.f0_hat * es0 + f.f1_hat * es1,
          f.f0_hat * es0_sq + f.f1_hat * es1_sq};
}

enum class LeadSide { alpha, beta };

// Stationary law of the saturated lead process: a birth-death chain over how
// far one recovery server leads the other.
//   p00 = (gamma^2 - (alpha-beta)^2) / (gamma (alpha+beta+gamma)),
//   p_{i,0} = (alpha/(beta+gamma))^i p00,  p_{0,i} = (beta/(alpha+gamma))^i p00.
struct BirthDeathStationary {
  double p00 = 0.0;
  double ratio_alpha = 0.0;  // alpha side geometric ratio
  double ratio_beta = 0.0;

  double prob(int lead, LeadSide side) const {
    if (lead < 0) throw invalid_parameter_error("lead must be >= 0");
    if (lead == 0) return p00;
    double ratio = (side == LeadSide::alpha) ? ratio_alpha : ratio_beta;
    return std::pow(ratio, lead) * p00;
  }
};

inline BirthDeathStationary birth_death_steady_state(
    const HighTrafficRates& rates) {
  validate_rates(rates);
  if (rates.alpha >= rates.beta + rates.gamma)
    throw instability_error("alpha >= beta + gamma");
  if (rates.beta >= rates.alpha + rates.gamma)
    throw instability_error("beta >= alpha + gamma");
  double g = rates.gamma, a = rates.alpha, b = rates.beta;
  double p00 = (g * g - (a - b) * (a - b)) / (g * (a + b + g));
  return {p00, a / (b + g), b / (a + g)};
}

// Saturated departure rate of the (gamma, alpha, beta) system; arrivals below
// this rate keep the queue positive recurrent. For alpha = beta = mu it equals
// (gamma^2 + 2 gamma mu + 2 mu^2) / (gamma + 2 mu).
inline double fjfa_r2t1_stability_limit(const HighTrafficRates& rates) {
  BirthDeathStationary bd = birth_death_steady_state(rates);
  double mass_alpha = bd.p00 * bd.ratio_alpha / (1.0 - bd.ratio_alpha);
  double mass_beta = bd.p00 * bd.ratio_beta / (1.0 - bd.ratio_beta);
  return rates.gamma + rates.beta * mass_alpha + rates.alpha * mass_beta;
}

}  // namespace fjlat
