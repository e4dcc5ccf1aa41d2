#pragma once

// Truncated quasi-birth-death model of the locality-two / availability-one
// fork-join system with rates (lambda; gamma, alpha, beta).
//
// Level = requests in system; phase = lead configuration (a, b) with a*b = 0,
// leads capped at 2 ("five central columns"). A capped leading server has its
// service transition suppressed, which only slows the system and so preserves
// the upper-bound direction of the mean response time.
//
// Phase order matches the boundary/repeating vectors pi0, pi1:
//   boundary: (0,(0,0)), (1,(0,1)), (1,(0,0)), (1,(1,0))
//   repeating: (0,2), (0,1), (0,0), (1,0), (2,0)
//
// The 5x5 linear algebra (LU, inverse, norm powers) is in-module; the fixed
// tiny dimension does not warrant a solver dependency.

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "fjlat/errors.hpp"

namespace fjlat {

class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {}

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int i, int j) { return a_[i * cols_ + j]; }
  double operator()(int i, int j) const { return a_[i * cols_ + j]; }

  Matrix operator*(const Matrix& o) const {
    Matrix out(rows_, o.cols_);
    for (int i = 0; i < rows_; ++i)
      for (int l = 0; l < cols_; ++l) {
        double v = (*this)(i, l);
        if (v == 0.0) continue;
        for (int j = 0; j < o.cols_; ++j) out(i, j) += v * o(l, j);
      }
    return out;
  }

  Matrix operator+(const Matrix& o) const {
    Matrix out = *this;
    for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] += o.a_[i];
    return out;
  }

  Matrix operator-(const Matrix& o) const {
    Matrix out = *this;
    for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] -= o.a_[i];
    return out;
  }

  Matrix scaled(double s) const {
    Matrix out = *this;
    for (double& v : out.a_) v *= s;
    return out;
  }

  double max_norm() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
  }

  double max_abs_row_sum() const {
    double m = 0.0;
    for (int i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (int j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
      m = std::max(m, s);
    }
    return m;
  }

  std::vector<double> row_sums() const {
    std::vector<double> s(rows_, 0.0);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) s[i] += (*this)(i, j);
    return s;
  }

  // Solves (*this) x = rhs by LU with partial pivoting.
  std::vector<double> solve(std::vector<double> rhs) const {
    if (rows_ != cols_ || static_cast<int>(rhs.size()) != rows_)
      throw invalid_parameter_error("Matrix::solve: shape mismatch");
    Matrix lu = *this;
    int n = rows_;
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int col = 0; col < n; ++col) {
      int pivot = col;
      for (int i = col + 1; i < n; ++i)
        if (std::abs(lu(i, col)) > std::abs(lu(pivot, col))) pivot = i;
      if (std::abs(lu(pivot, col)) < 1e-300)
        throw degenerate_model_error("Matrix::solve: singular matrix");
      if (pivot != col) {
        for (int j = 0; j < n; ++j) std::swap(lu(col, j), lu(pivot, j));
        std::swap(rhs[col], rhs[pivot]);
      }
      for (int i = col + 1; i < n; ++i) {
        double f = lu(i, col) / lu(col, col);
        lu(i, col) = 0.0;
        if (f == 0.0) continue;
        for (int j = col + 1; j < n; ++j) lu(i, j) -= f * lu(col, j);
        rhs[i] -= f * rhs[col];
      }
    }
    std::vector<double> x(n, 0.0);
    for (int i = n - 1; i >= 0; --i) {
      double s = rhs[i];
      for (int j = i + 1; j < n; ++j) s -= lu(i, j) * x[j];
      x[i] = s / lu(i, i);
    }
    return x;
  }

  Matrix inverse() const {
    if (rows_ != cols_)
      throw invalid_parameter_error("Matrix::inverse: not square");
    int n = rows_;
    Matrix out(n, n);
    for (int j = 0; j < n; ++j) {
      std::vector<double> e(n, 0.0);
      e[j] = 1.0;
      auto col = solve(e);
      for (int i = 0; i < n; ++i) out(i, j) = col[i];
    }
    return out;
  }

  Matrix transpose() const {
    Matrix out(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    return out;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

inline std::vector<double> vec_mat(const std::vector<double>& v,
                                   const Matrix& m) {
  std::vector<double> out(m.cols(), 0.0);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out[j] += v[i] * m(i, j);
  return out;
}

inline double dot_ones(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

// Upper estimate of the spectral radius of a non-negative matrix via
// ||R^(2^k)||_inf^(1/2^k); converges to sr(R) from above.
inline double spectral_radius_estimate(const Matrix& r, int squarings = 14) {
  // With P_0 = R and P_{i+1} = (P_i/n_i)^2, R^(2^s) = prod n_i^(2^(s-i)) P_s,
  // so ||R^K||^(1/K) = exp(sum 2^{-i} log n_i + 2^{-s} log ||P_s||).
  Matrix p = r;
  double log_acc = 0.0;
  double w = 1.0;
  for (int i = 0; i < squarings; ++i) {
    double norm = p.max_abs_row_sum();
    if (norm == 0.0) return 0.0;
    log_acc += w * std::log(norm);
    w /= 2.0;
    p = p.scaled(1.0 / norm);
    p = p * p;
  }
  return std::exp(log_acc + w * std::log(p.max_abs_row_sum()));
}

struct Phase {
  int a = 0;  // lead of server alpha
  int b = 0;  // lead of server beta
};

inline constexpr int kNumPhases = 5;
inline constexpr int kNumBoundary = 4;

inline const std::array<Phase, kNumPhases>& repeating_phases() {
  static const std::array<Phase, kNumPhases> p = {
      Phase{0, 2}, Phase{0, 1}, Phase{0, 0}, Phase{1, 0}, Phase{2, 0}};
  return p;
}

struct BoundaryState {
  int level = 0;  // requests in system (0 or 1)
  Phase phase;
};

inline const std::array<BoundaryState, kNumBoundary>& boundary_states() {
  static const std::array<BoundaryState, kNumBoundary> s = {
      BoundaryState{0, {0, 0}}, BoundaryState{1, {0, 1}},
      BoundaryState{1, {0, 0}}, BoundaryState{1, {1, 0}}};
  return s;
}

struct QbdModel {
  double lambda = 0.0, gamma = 0.0, alpha = 0.0, beta = 0.0;
  Matrix a0;   // level up (5x5)
  Matrix a1;   // within level (5x5)
  Matrix a2;   // level down (5x5)
  Matrix b00;  // boundary internal (4x4)
  Matrix b01;  // boundary -> first repeating level (4x5)
  Matrix b10;  // first repeating level -> boundary (5x4)
};

inline QbdModel build_qbd(double lambda, double gamma, double alpha,
                          double beta) {
  if (!(lambda > 0.0) || !(gamma > 0.0) || !(alpha > 0.0) || !(beta > 0.0))
    throw invalid_parameter_error("build_qbd: rates must be positive");
  QbdModel m{lambda, gamma, alpha, beta,
             Matrix(5, 5), Matrix(5, 5), Matrix(5, 5),
             Matrix(4, 4), Matrix(4, 5), Matrix(5, 4)};

  const auto& phases = repeating_phases();
  auto phase_index = [&](int a, int b) {
    for (int i = 0; i < kNumPhases; ++i)
      if (phases[i].a == a && phases[i].b == b) return i;
    throw invalid_parameter_error("build_qbd: phase out of truncation");
  };

  // Repeating levels (N >= 2). Arrivals keep the phase.
  for (int i = 0; i < kNumPhases; ++i) m.a0(i, i) = lambda;
  for (int i = 0; i < kNumPhases; ++i) {
    int a = phases[i].a, b = phases[i].b;
    double out = lambda;

    // Systematic completion: departure, both leads shrink toward 0.
    m.a2(i, phase_index(std::max(a - 1, 0), std::max(b - 1, 0))) += gamma;
    out += gamma;

    if (a >= 1) {
      // beta serves the oldest request's copy, whose alpha-copy already
      // departed: recovery completion.
      m.a2(i, phase_index(a - 1, 0)) += beta;
      out += beta;
      if (a < 2) {  // alpha extends its lead; blocked at the cap
        m.a1(i, phase_index(a + 1, 0)) += alpha;
        out += alpha;
      }
    } else if (b >= 1) {
      m.a2(i, phase_index(0, b - 1)) += alpha;
      out += alpha;
      if (b < 2) {
        m.a1(i, phase_index(0, b + 1)) += beta;
        out += beta;
      }
    } else {  // (0,0): either recovery server starts a lead
      m.a1(i, phase_index(1, 0)) += alpha;
      m.a1(i, phase_index(0, 1)) += beta;
      out += alpha + beta;
    }
    m.a1(i, i) -= out;
  }

  // Boundary: s0=(0,(0,0)), s1=(1,(0,1)), s2=(1,(0,0)), s3=(1,(1,0)).
  // s0: empty system, only an arrival (to s2).
  m.b00(0, 2) += lambda;
  m.b00(0, 0) -= lambda;
  // s1: beta already served the lone request; gamma or alpha completes it.
  m.b00(1, 0) += gamma + alpha;
  m.b01(1, phase_index(0, 1)) += lambda;
  m.b00(1, 1) -= lambda + gamma + alpha;
  // s2: all three servers on the lone request.
  m.b00(2, 0) += gamma;
  m.b00(2, 3) += alpha;
  m.b00(2, 1) += beta;
  m.b01(2, phase_index(0, 0)) += lambda;
  m.b00(2, 2) -= lambda + gamma + alpha + beta;
  // s3: mirror of s1.
  m.b00(3, 0) += gamma + beta;
  m.b01(3, phase_index(1, 0)) += lambda;
  m.b00(3, 3) -= lambda + gamma + beta;

  // First repeating level (N = 2) down to the boundary.
  m.b10(phase_index(0, 2), 1) += gamma + alpha;
  m.b10(phase_index(0, 1), 2) += gamma + alpha;
  m.b10(phase_index(0, 0), 2) += gamma;
  m.b10(phase_index(1, 0), 2) += gamma + beta;
  m.b10(phase_index(2, 0), 3) += gamma + beta;
  return m;
}

// Minimal non-negative solution of A0 + R A1 + R^2 A2 = 0 by the fixed-point
// iteration R <- -(A0 + R^2 A2) A1^{-1} from R = 0.
inline Matrix solve_R(const QbdModel& model, double tol = 1e-12,
                      long max_iter = 1000000) {
  Matrix a1_inv = model.a1.inverse();
  Matrix r(5, 5);
  for (long iter = 0; iter < max_iter; ++iter) {
    Matrix next = (model.a0 + r * r * model.a2).scaled(-1.0) * a1_inv;
    double diff = (next - r).max_norm();
    r = next;
    if (diff <= tol) {
      double sr = spectral_radius_estimate(r);
      if (sr >= 1.0) throw instability_error("spectral radius of R >= 1");
      return r;
    }
  }
  throw iteration_limit_error("solve_R: no convergence within max_iter");
}

inline double solve_R_residual(const QbdModel& model, const Matrix& r) {
  return (model.a0 + r * model.a1 + r * r * model.a2).max_norm();
}

struct BoundarySolution {
  std::vector<double> pi0;  // length 4
  std::vector<double> pi1;  // length 5
};

// Boundary balance plus matrix-geometric normalization:
//   pi0 B00 + pi1 B10 = 0, pi0 B01 + pi1 (A1 + R A2) = 0,
//   pi0 1 + pi1 (I - R)^{-1} 1 = 1.
// One balance equation is redundant and is replaced by the normalization.
inline BoundarySolution solve_boundary(const QbdModel& model, const Matrix& r) {
  Matrix level1 = model.a1 + r * model.a2;
  Matrix inv_i_minus_r = (Matrix::identity(5) - r).inverse();
  std::vector<double> tail_weight(5, 0.0);  // (I-R)^{-1} 1 per phase
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) tail_weight[i] += inv_i_minus_r(i, j);

  // Columns are equations; column 0 becomes the normalization.
  Matrix sys(9, 9);
  for (int eq = 0; eq < 4; ++eq) {
    for (int i = 0; i < 4; ++i) sys(i, eq) = model.b00(i, eq);
    for (int i = 0; i < 5; ++i) sys(4 + i, eq) = model.b10(i, eq);
  }
  for (int eq = 0; eq < 5; ++eq) {
    for (int i = 0; i < 4; ++i) sys(i, 4 + eq) = model.b01(i, eq);
    for (int i = 0; i < 5; ++i) sys(4 + i, 4 + eq) = level1(i, eq);
  }
  for (int i = 0; i < 4; ++i) sys(i, 0) = 1.0;
  for (int i = 0; i < 5; ++i) sys(4 + i, 0) = tail_weight[i];

  std::vector<double> rhs(9, 0.0);
  rhs[0] = 1.0;
  std::vector<double> x = sys.transpose().solve(rhs);

  BoundarySolution sol;
  sol.pi0.assign(x.begin(), x.begin() + 4);
  sol.pi1.assign(x.begin() + 4, x.end());
  for (double v : sol.pi0)
    if (v < -1e-9) throw degenerate_model_error("solve_boundary: negative pi0");
  for (double v : sol.pi1)
    if (v < -1e-9) throw degenerate_model_error("solve_boundary: negative pi1");
  return sol;
}

struct QbdSolution {
  Matrix r;
  std::vector<double> pi0;
  std::vector<double> pi1;
  double spectral_radius = 0.0;
  double residual = 0.0;
  double mean_jobs = 0.0;
  double mean_time_ub = 0.0;
};

inline QbdSolution solve_qbd(double lambda, double gamma, double alpha,
                             double beta, double tol = 1e-12) {
  QbdModel model = build_qbd(lambda, gamma, alpha, beta);
  QbdSolution sol;
  sol.r = solve_R(model, tol);
  sol.residual = solve_R_residual(model, sol.r);
  sol.spectral_radius = spectral_radius_estimate(sol.r);
  BoundarySolution b = solve_boundary(model, sol.r);
  sol.pi0 = b.pi0;
  sol.pi1 = b.pi1;

  // E[N] = pi0 (0,1,1,1)^T + pi1 ((I-R)^{-2} + (I-R)^{-1}) 1, since repeating
  // level j holds j+1 requests; E[T] = E[N]/lambda by Little's law.
  Matrix inv = (Matrix::identity(5) - sol.r).inverse();
  Matrix weight = inv * inv + inv;
  double jobs = sol.pi0[1] + sol.pi0[2] + sol.pi0[3];
  auto w1 = vec_mat(sol.pi1, weight);
  jobs += dot_ones(w1);
  sol.mean_jobs = jobs;
  sol.mean_time_ub = jobs / lambda;
  return sol;
}

// Matrix-analytic upper bound on the mean download time.
inline double ma_mean_ub(double lambda, double gamma, double alpha,
                         double beta) {
  return solve_qbd(lambda, gamma, alpha, beta).mean_time_ub;
}

}  // namespace fjlat
