#pragma once

// Closed-form expected download times in the low-traffic regime (one request
// in the system at a time) and the four-code comparison table.

#include <string>
#include <vector>

#include "fjlat/codes.hpp"
#include "fjlat/dist.hpp"
#include "fjlat/errors.hpp"

namespace fjlat {

// E[T] = beta(t+1, 1/r) / (mu r) for a systematic server plus t groups of r.
inline double et_availability(int r, int t, double mu) {
  if (r < 1 || t < 0 || !(mu > 0.0))
    throw invalid_parameter_error("et_availability: need r>=1, t>=0, mu>0");
  return beta_fn(t + 1.0, 1.0 / r) / (mu * r);
}

inline double et_replication(int t_rep, double mu) {
  if (t_rep < 1 || !(mu > 0.0))
    throw invalid_parameter_error("et_replication: need t_rep>=1, mu>0");
  return 1.0 / (t_rep * mu);
}

// Replication with the cumulative rate of an (n,k) system: depends on k/n only.
inline double et_replication_normalized(int n, int k, double mu) {
  if (k < 1 || n < k || !(mu > 0.0))
    throw invalid_parameter_error("et_replication_normalized: need n>=k>=1, mu>0");
  return static_cast<double>(k) / (n * mu);
}

inline double et_mds(int n, int k, double mu) {
  if (k < 1 || n < k || !(mu > 0.0))
    throw invalid_parameter_error("et_mds: need n>=k>=1, mu>0");
  return static_cast<double>(k) / (n * mu);
}

// Relative drop in E[T] from availability t to t+1: 1/(r(t+1)+1).
inline double relative_gain_per_t(int r, int t) {
  if (r < 1 || t < 0)
    throw invalid_parameter_error("relative_gain_per_t: need r>=1, t>=0");
  return 1.0 / (r * (t + 1.0) + 1.0);
}

struct ComparisonRow {
  std::string label;
  double et_mu_raw = 0.0;         // E[T]*mu at per-server rate mu
  double et_mu_normalized = 0.0;  // E[T]*mu with per-server rate baseline/n
  double storage_overhead = 0.0;
  int fault_tolerance = 0;
};

// Rows for 3-replication(k=6), (9,6)-MDS, (10,6,3,1)-LRC, (14,6,2,3)-LRC.
// The normalized column scales every system's per-server rate so that the
// cumulative rate equals baseline_cumulative_rate (the (9,6) system's 9*mu
// reproduces all four published parenthesized values).
inline std::vector<ComparisonRow> comparison_table(
    double mu, double baseline_cumulative_rate) {
  if (!(mu > 0.0) || !(baseline_cumulative_rate > 0.0))
    throw invalid_parameter_error("comparison_table: rates must be positive");
  std::vector<ComparisonRow> rows;

  auto normalized_rate = [&](int n) { return baseline_cumulative_rate / n; };

  {  // 3-replication of k=6 objects on n=18 servers
    CodeParams p{18, 6, 1, 2, 3};
    rows.push_back({"3-replication", et_replication(3, mu) * mu,
                    et_replication(3, normalized_rate(p.n)) * mu,
                    storage_overhead(p), fault_tolerance(*p.min_distance)});
  }
  {  // (9,6)-MDS
    CodeParams p{9, 6, 1, 0, 4};
    rows.push_back({"(9,6)-MDS", et_mds(9, 6, mu) * mu,
                    et_mds(9, 6, normalized_rate(p.n)) * mu,
                    storage_overhead(p), fault_tolerance(*p.min_distance)});
  }
  {  // (10,6,3,1)-LRC, availability formula with r=3, t=1
    CodeParams p = azure_lrc_params_table();
    rows.push_back({"(10,6,3,1)-LRC", et_availability(p.r, p.t, mu) * mu,
                    et_availability(p.r, p.t, normalized_rate(p.n)) * mu,
                    storage_overhead(p), fault_tolerance(*p.min_distance)});
  }
  {  // (14,6,2,3)-LRC, direct sum of two (7,3,2,3)-Simplex codes
    CodeParams p{14, 6, 2, 3, 4};
    rows.push_back({"(14,6,2,3)-LRC", et_availability(p.r, p.t, mu) * mu,
                    et_availability(p.r, p.t, normalized_rate(p.n)) * mu,
                    storage_overhead(p), fault_tolerance(*p.min_distance)});
  }
  return rows;
}

}  // namespace fjlat
