#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "fjlat/errors.hpp"

namespace fjlat {

// 97.5% Student-t quantile (two-sided 95% confidence), standard table values
// for df 1..30 and 1/df interpolation through 40, 60, 120, inf above that.
inline double t_quantile_975(int df) {
  static constexpr double kTable[30] = {
      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
      2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
      2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (df < 1) throw invalid_parameter_error("t_quantile_975: df must be >= 1");
  if (df <= 30) return kTable[df - 1];
  struct Node {
    int df;
    double q;
  };
  static constexpr Node kTail[] = {{30, 2.042}, {40, 2.021}, {60, 2.000},
                                   {120, 1.980}};
  double x = 1.0 / df;
  for (std::size_t i = 0; i + 1 < std::size(kTail); ++i) {
    if (df <= kTail[i + 1].df) {
      double x0 = 1.0 / kTail[i].df, x1 = 1.0 / kTail[i + 1].df;
      double w = (x - x1) / (x0 - x1);
      return kTail[i + 1].q + w * (kTail[i].q - kTail[i + 1].q);
    }
  }
  // Beyond df=120 interpolate toward the normal quantile.
  double w = x / (1.0 / 120.0);
  return 1.960 + w * (1.980 - 1.960);
}

struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;  // 95% confidence, Student-t over the samples
};

inline MeanCi mean_ci(const std::vector<double>& xs) {
  if (xs.empty()) throw degenerate_input_error("mean_ci: no samples");
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  double hw = t_quantile_975(static_cast<int>(xs.size()) - 1) * sd /
              std::sqrt(static_cast<double>(xs.size()));
  return {m, hw};
}

// Kahan-compensated accumulator for alternating sums.
class CompensatedSum {
 public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

}  // namespace fjlat
