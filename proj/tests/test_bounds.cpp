#include "fjlat/bounds.hpp"

#include <cmath>
#include <random>

#include "catch2/catch_amalgamated.hpp"
#include "oracles.hpp"

using namespace fjlat;
using Catch::Approx;

TEST_CASE("pk_mean") {
  // lambda -> 0 reduces to the mean
  CHECK(pk_mean({0.0, {0.7, 0.9}}) == Approx(0.7).epsilon(1e-12));
  // slowest r=2,t=1 service at lambda=1: 2/3 + (7/9)/(2/3) = 11/6
  CHECK(pk_mean({1.0, {2.0 / 3.0, 7.0 / 9.0}}) ==
        Approx(11.0 / 6.0).epsilon(1e-12));
  // exponential service makes PK collapse to M/M/1
  for (double rate : {1.5, 3.0})
    for (double lambda : {0.2, 0.9}) {
      Moments mm1{1.0 / rate, 2.0 / (rate * rate)};
      CHECK(pk_mean({lambda, mm1}) ==
            Approx(oracle::mm1_mean(lambda, rate)).epsilon(1e-12));
    }
  CHECK_THROWS_AS(pk_mean({2.0, {0.5, 0.5}}), instability_error);
}

TEST_CASE("fjga_ccdf_lower") {
  PopularityVector p2{{0.5, 0.5}};
  CHECK(fjga_ccdf_lower(0.0, 1.0, p2, 1, 1.0) == Approx(1.0));
  CHECK(fjga_ccdf_lower(1.0, 1.0, p2, 1, 1.0) ==
        Approx(std::exp(-1.5)).epsilon(1e-12));
  // k=1 reduces to the Fast-Split-Merge tail bound
  PopularityVector p1{{1.0}};
  for (double x : {0.1, 0.5, 2.0})
    CHECK(fjga_ccdf_lower(x, 0.7, p1, 2, 1.0) ==
          Approx(std::exp(-(3.0 - 0.7) * x)).epsilon(1e-12));
  // non-increasing in x
  double prev = 1.0;
  for (double x = 0.0; x < 4.0; x += 0.1) {
    double v = fjga_ccdf_lower(x, 1.0, p2, 1, 1.0);
    CHECK(v <= prev + 1e-15);
    prev = v;
  }
  CHECK_THROWS_AS(fjga_ccdf_lower(1.0, 10.0, p1, 1, 1.0), instability_error);
}

TEST_CASE("fjga_mean_lower") {
  PopularityVector p1{{1.0}};
  CHECK(fjga_mean_lower(1.0, p1, 1, 1.0) == Approx(1.0).epsilon(1e-12));
  PopularityVector p2{{0.5, 0.5}};
  CHECK(fjga_mean_lower(1.0, p2, 1, 1.0) == Approx(2.0 / 3.0).epsilon(1e-12));
  PopularityVector skew{{0.9, 0.1}};
  CHECK(fjga_mean_lower(1.0, skew, 1, 1.0) ==
        Approx(0.9 / 1.1 + 0.1 / 1.9).epsilon(1e-12));
  CHECK(fjga_mean_lower(1.0, skew, 1, 1.0) > fjga_mean_lower(1.0, p2, 1, 1.0));
  CHECK_THROWS_AS(fjga_mean_lower(4.0, p1, 1, 1.0), instability_error);
}

TEST_CASE("uniform popularity minimizes the mixture lower bound") {
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    double a = u(gen), b = u(gen), c = u(gen);
    PopularityVector p{{a / (a + b + c), b / (a + b + c), c / (a + b + c)}};
    double lambda = 1.2, mu = 1.0;
    int t = 1;
    double uniform = fjga_mean_lower(lambda, uniform_popularity(3), t, mu);
    CHECK(uniform <= fjga_mean_lower(lambda, p, t, mu) + 1e-12);
  }
}

TEST_CASE("sm_mean_upper") {
  CHECK(sm_mean_upper(1.0, 2, 1, 1.0) == Approx(11.0 / 6.0).epsilon(1e-12));
  CHECK(sm_mean_upper(1e-12, 2, 3, 1.0) ==
        Approx(et_availability(2, 3, 1.0)).epsilon(1e-6));
  // r=1: slowest == fastest, an M/M/1 at rate (t+1)mu
  CHECK(sm_mean_upper(1.0, 1, 1, 1.0) == Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(sm_mean_upper(2.2, 2, 1, 1.0), instability_error);
}

TEST_CASE("sm_mean_upper equals the closed-form double sum") {
  for (int r : {1, 2, 3})
    for (int t : {1, 2, 3})
      for (double mu : {1.0, 2.0}) {
        double eta = et_availability(r, t, mu);
        for (double load : {0.1, 0.5, 0.9}) {
          double lambda = load / eta;
          CHECK(sm_mean_upper(lambda, r, t, mu) ==
                Approx(oracle::sm_upper_closed_form(lambda, r, t, mu, eta))
                    .epsilon(1e-10));
        }
      }
}

TEST_CASE("fsm_mean_lower") {
  CHECK(fsm_mean_lower(1.0, 1, 1.0) == Approx(1.0).epsilon(1e-12));
  CHECK(fsm_mean_lower(0.0, 3, 1.0) == Approx(0.25).epsilon(1e-12));
  CHECK(fsm_mean_lower(2.0, 3, 1.0) == Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(fsm_mean_lower(2.0, 1, 1.0), instability_error);
}

TEST_CASE("approx_mixture_mean") {
  // degenerate mixtures collapse to the SM / FSM values
  TypeFrequencies slowest_only{2, 1, {1.0, 0.0}};
  CHECK(approx_mixture_mean(slowest_only, 0.8, 2, 1, 1.0) ==
        Approx(sm_mean_upper(0.8, 2, 1, 1.0)).epsilon(1e-12));
  TypeFrequencies fastest_only{2, 1, {0.0, 1.0}};
  CHECK(approx_mixture_mean(fastest_only, 0.8, 2, 1, 1.0) ==
        Approx(1.0 / (2.0 - 0.8)).epsilon(1e-12));
  // worked mixture at lambda = 0.5, f = (0.6, 0.4)
  TypeFrequencies f{2, 1, {0.6, 0.4}};
  CHECK(approx_mixture_mean(f, 0.5, 2, 1, 1.0) ==
        Approx(0.6 + 0.5 * (2.0 / 3.0) / (2.0 * 0.7)).epsilon(1e-12));
  CHECK_THROWS_AS(approx_mixture_mean(TypeFrequencies{2, 1, {0.7, 0.7}}, 0.5, 2,
                                      1, 1.0),
                  invalid_parameter_error);
}

TEST_CASE("sandwich: fsm <= mixture approx <= sm") {
  std::mt19937 gen(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    int r = 1 + gen() % 3;
    int t = 1 + gen() % 3;
    double mu = 0.5 + u(gen) * 2.0;
    double eta = et_availability(r, t, mu);
    double lambda = 0.8 * u(gen) / eta;
    auto types = enumerate_types(r, t);
    std::vector<double> f(types.size());
    double norm = 0.0;
    for (auto& fi : f) norm += (fi = 0.05 + u(gen));
    for (auto& fi : f) fi /= norm;
    double mix = approx_mixture_mean({r, t, f}, lambda, r, t, mu);
    CHECK(mix >= fsm_mean_lower(lambda, t, mu) - 1e-10);
    CHECK(mix <= sm_mean_upper(lambda, r, t, mu) + 1e-10);
    // and the popularity mixture bound sits below the SM bound too
    double lb = fjga_mean_lower(lambda, uniform_popularity(2), t, mu);
    CHECK(lb <= sm_mean_upper(lambda, r, t, mu) + 1e-10);
  }
}

TEST_CASE("approx_r2_weights worked example") {
  // t=1, mu=1, lambda=0.5: E[V] = 7/12, rho0 = 7/17, weights (17/24, 7/24)
  auto w = approx_r2_weights(0.5, 1, 1.0);
  REQUIRE(w.rho.size() == 1);
  CHECK(w.rho[0] == Approx(7.0 / 17.0).epsilon(1e-12));
  REQUIRE(w.weight.size() == 2);
  CHECK(w.weight[0] == Approx(17.0 / 24.0).epsilon(1e-12));
  CHECK(w.weight[1] == Approx(7.0 / 24.0).epsilon(1e-12));
}

TEST_CASE("approx_r2_weights matches the independent closed form") {
  for (int t : {1, 2, 3, 5})
    for (double lambda : {0.3, 0.8, 1.2}) {
      double ev = 0.0;
      for (int i = 0; i <= t; ++i) ev += r2_type_moments(i, t, 1.0).mean;
      ev /= (t + 1.0);
      if (lambda * ev >= 1.0) continue;
      auto w = approx_r2_weights(lambda, t, 1.0);
      auto closed = oracle::approx_r2_weights_closed_form(lambda * ev, t);
      REQUIRE(w.weight.size() == closed.size());
      for (std::size_t i = 0; i < closed.size(); ++i)
        CHECK(w.weight[i] == Approx(closed[i]).margin(1e-10));
    }
}

TEST_CASE("approx_r2_mean limits and domain") {
  // lambda -> 0: weight collapses on type-0 and the mean approaches E[S_0]
  double tiny = approx_r2_mean(1e-9, 2, 1.0);
  CHECK(tiny == Approx(r2_type_moments(0, 2, 1.0).mean).margin(1e-6));
  // instability of the PK stage surfaces as an error for large lambda
  CHECK_THROWS_AS(approx_r2_mean(5.0, 1, 1.0), approximation_domain_error);
}

TEST_CASE("approx_r2 weights are non-increasing when all rho < 1") {
  for (int t : {1, 2, 3, 4})
    for (double lambda : {0.2, 0.6, 1.0, 1.3}) {
      ApproxR2Weights w;
      try {
        w = approx_r2_weights(lambda, t, 1.0);
      } catch (const approximation_domain_error&) {
        continue;
      }
      bool all_below_one = true;
      for (double r : w.rho)
        if (r > 1.0 + 1e-12) all_below_one = false;
      if (!all_below_one) continue;
      for (std::size_t i = 0; i + 1 < w.weight.size(); ++i)
        CHECK(w.weight[i] >= w.weight[i + 1] - 1e-12);
    }
}

TEST_CASE("hightraffic_fractions") {
  auto f = hightraffic_fractions({1.0, 1.0, 1.0});
  CHECK(f.f0_hat == Approx(0.6).epsilon(1e-12));
  CHECK(f.f1_hat == Approx(0.4).epsilon(1e-12));
  CHECK(f.ws_hat == Approx(0.6).epsilon(1e-12));
  CHECK(f.wr_hat == Approx(0.4).epsilon(1e-12));

  auto g2 = hightraffic_fractions({2.0, 1.0, 1.0});
  CHECK(g2.f0_hat == Approx(0.8).epsilon(1e-12));
  CHECK(g2.f1_hat == Approx(0.2).epsilon(1e-12));

  // gamma -> inf: the systematic server always wins
  auto big = hightraffic_fractions({1e9, 1.0, 1.0});
  CHECK(big.f0_hat == Approx(1.0).margin(1e-8));
  CHECK(big.wr_hat == Approx(0.0).margin(1e-8));

  CHECK_THROWS_AS(hightraffic_fractions({1.0, 1.0, 2.0}),
                  invalid_parameter_error);
}

TEST_CASE("r2t1_service_moment_lb") {
  Moments m = r2t1_service_moment_lb(1.0, 1.0);
  CHECK(m.mean == Approx(0.6).epsilon(1e-12));
  CHECK(m.second == Approx(2.0 / 3.0).epsilon(1e-12));
  // gamma -> inf: service vanishes
  CHECK(r2t1_service_moment_lb(1e9, 1.0).mean == Approx(0.0).margin(1e-8));
  // the bound is a valid moment pair
  for (double gamma : {0.3, 1.0, 4.0}) {
    Moments mm = r2t1_service_moment_lb(gamma, 1.0);
    CHECK(mm.second >= mm.mean * mm.mean);
  }
}

TEST_CASE("birth_death_steady_state") {
  auto bd = birth_death_steady_state({1.0, 1.0, 1.0});
  CHECK(bd.p00 == Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(bd.ratio_alpha == Approx(0.5).epsilon(1e-12));
  CHECK(bd.ratio_beta == Approx(0.5).epsilon(1e-12));

  // alpha == beta simplification: p00 = gamma/(gamma + 2 alpha)
  for (double gamma : {0.5, 1.0, 3.0})
    for (double a : {0.4, 1.0}) {
      auto sym = birth_death_steady_state({gamma, a, a});
      CHECK(sym.p00 == Approx(gamma / (gamma + 2.0 * a)).epsilon(1e-12));
    }

  auto asym = birth_death_steady_state({2.0, 1.0, 2.0});
  CHECK(asym.p00 == Approx(0.3).epsilon(1e-12));

  // normalization over a geometric tail
  for (auto rates : {HighTrafficRates{1.0, 1.0, 1.0}, {2.0, 1.0, 2.0},
                     {0.7, 0.9, 0.5}}) {
    auto s = birth_death_steady_state(rates);
    double total = s.p00;
    for (int i = 1; i < 2000; ++i)
      total += s.prob(i, LeadSide::alpha) + s.prob(i, LeadSide::beta);
    CHECK(total == Approx(1.0).margin(1e-10));
  }

  CHECK_THROWS_AS(birth_death_steady_state({0.5, 2.0, 1.0}), instability_error);
}

TEST_CASE("fjfa_r2t1_stability_limit") {
  // alpha = beta = mu closed form: (gamma^2 + 2 gamma mu + 2 mu^2)/(gamma + 2 mu)
  for (double gamma : {0.5, 1.0, 2.0})
    for (double mu : {0.7, 1.0}) {
      double expected = (gamma * gamma + 2.0 * gamma * mu + 2.0 * mu * mu) /
                        (gamma + 2.0 * mu);
      CHECK(fjfa_r2t1_stability_limit({gamma, mu, mu}) ==
            Approx(expected).epsilon(1e-12));
    }
  CHECK(fjfa_r2t1_stability_limit({1.0, 1.0, 1.0}) ==
        Approx(5.0 / 3.0).epsilon(1e-12));
}
