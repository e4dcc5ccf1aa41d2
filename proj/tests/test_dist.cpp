#include "fjlat/dist.hpp"

#include <cmath>
#include <random>

#include "catch2/catch_amalgamated.hpp"
#include "oracles.hpp"

using namespace fjlat;
using Catch::Approx;

TEST_CASE("beta_fn matches known values") {
  CHECK(beta_fn(1.0, 1.0) == Approx(1.0).epsilon(1e-12));
  CHECK(beta_fn(4.0, 0.5) == Approx(32.0 / 35.0).epsilon(1e-10));
  CHECK(beta_fn(2.0, 0.5) == Approx(4.0 / 3.0).epsilon(1e-10));
  CHECK_THROWS_AS(beta_fn(0.0, 1.0), invalid_parameter_error);
  CHECK_THROWS_AS(beta_fn(1.0, -2.0), invalid_parameter_error);
}

TEST_CASE("beta_fn agrees with quadrature") {
  auto ref = [](double x, double y) {
    return oracle::adaptive_simpson(
        [&](double v) { return std::pow(v, x - 1.0) * std::pow(1.0 - v, y - 1.0); },
        1e-12, 1.0 - 1e-12, 1e-13);
  };
  for (auto [x, y] : {std::pair{2.0, 3.0}, {4.0, 1.5}, {1.0, 7.0}})
    CHECK(beta_fn(x, y) == Approx(ref(x, y)).epsilon(1e-8));
}

TEST_CASE("avail_survival values") {
  CHECK(avail_survival(0.0, 2, 1, 1.0) == 1.0);
  CHECK(avail_survival(std::log(2.0), 2, 1, 1.0) == Approx(0.375).epsilon(1e-12));
  // no recovery groups: plain exponential
  for (double s : {0.1, 0.7, 2.5})
    CHECK(avail_survival(s, 3, 0, 1.5) == Approx(std::exp(-1.5 * s)).epsilon(1e-12));
}

TEST_CASE("type_survival special cases") {
  // nu = (t,0,...,0) coincides with the slowest/availability survival
  for (int r : {2, 3})
    for (int t : {1, 2, 3})
      for (double s : {0.0, 0.3, 1.0, 2.7}) {
        CHECK(type_survival(slowest_type(r, t), s, 1.0) ==
              Approx(avail_survival(s, r, t, 1.0)).margin(1e-14));
        CHECK(type_survival(fastest_type(r, t), s, 1.0) ==
              Approx(std::exp(-(t + 1.0) * s)).margin(1e-14));
      }
  // fastest with r=2, t=1 at s=1: exp(-2)
  CHECK(type_survival(ServiceTypeVector{{0, 1}}, 1.0, 1.0) ==
        Approx(std::exp(-2.0)).epsilon(1e-12));
  // r=2, t=3, nu=(1,2), s=ln2: e^{-3s} (2e^{-s} - e^{-2s}) = (1/8)(3/4) = 3/32
  CHECK(type_survival(ServiceTypeVector{{1, 2}}, std::log(2.0), 1.0) ==
        Approx(3.0 / 32.0).epsilon(1e-12));
}

TEST_CASE("type_survival is a survival function bounded by the extremes") {
  std::mt19937 gen(7);
  for (int trial = 0; trial < 30; ++trial) {
    int r = 1 + gen() % 3;
    int t = 1 + gen() % 3;
    auto types = enumerate_types(r, t);
    const auto& nu = types[gen() % types.size()];
    double prev = 1.0;
    CHECK(type_survival(nu, 0.0, 1.0) == 1.0);
    for (double s = 0.05; s < 6.0; s += 0.05) {
      double v = type_survival(nu, s, 1.0);
      CHECK(v <= prev + 1e-14);
      CHECK(v >= type_survival(fastest_type(r, t), s, 1.0) - 1e-12);
      CHECK(v <= type_survival(slowest_type(r, t), s, 1.0) + 1e-12);
      prev = v;
    }
  }
}

TEST_CASE("type_moments closed cases") {
  // fastest: Exp((t+1)mu)
  for (int t : {1, 2, 4}) {
    Moments m = type_moments(fastest_type(2, t), 1.0);
    CHECK(m.mean == Approx(1.0 / (t + 1.0)).epsilon(1e-12));
    CHECK(m.second == Approx(2.0 / ((t + 1.0) * (t + 1.0))).epsilon(1e-12));
  }
  // r=2, t=1 slowest: integrate 2e^{-2s} - e^{-3s}
  Moments s21 = type_moments(ServiceTypeVector{{1, 0}}, 1.0);
  CHECK(s21.mean == Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(s21.second == Approx(7.0 / 9.0).epsilon(1e-12));
  // slowest mean equals beta(t+1, 1/r)/(mu r)
  for (int r : {2, 3, 4})
    for (int t : {1, 2, 3})
      CHECK(type_moments(slowest_type(r, t), 1.0).mean ==
            Approx(beta_fn(t + 1.0, 1.0 / r) / r).epsilon(1e-10));
}

TEST_CASE("type_moments agree with adaptive quadrature") {
  for (int r : {1, 2, 3})
    for (int t : {0, 1, 2, 3})
      for (double mu : {1.0, 2.5})
        for (const auto& nu : enumerate_types(r, t)) {
          Moments m = type_moments(nu, mu);
          auto surv = [&](double s) { return type_survival(nu, s, mu); };
          CHECK(m.mean ==
                Approx(oracle::mean_from_survival(surv, mu)).epsilon(1e-8));
          CHECK(m.second ==
                Approx(oracle::second_from_survival(surv, mu)).epsilon(1e-8));
          CHECK(m.second >= m.mean * m.mean);
        }
}

TEST_CASE("slowest_second_moment") {
  CHECK(slowest_second_moment(2, 1, 1.0) == Approx(7.0 / 9.0).epsilon(1e-12));
  CHECK(slowest_second_moment(3, 0, 2.0) == Approx(0.5).epsilon(1e-12));
  // r=1, t=1: min of two rate-1 exponentials -> Exp(2), second moment 1/2
  CHECK(slowest_second_moment(1, 1, 1.0) == Approx(0.5).epsilon(1e-12));
  // matches the expansion route
  for (int r : {1, 2, 3, 4})
    for (int t : {0, 1, 2, 3, 5})
      CHECK(slowest_second_moment(r, t, 1.0) ==
            Approx(type_moments(slowest_type(r, t), 1.0).second).epsilon(1e-10));
  // scales as 1/mu^2
  for (double mu : {0.5, 3.0})
    CHECK(slowest_second_moment(2, 3, mu) ==
          Approx(slowest_second_moment(2, 3, 1.0) / (mu * mu)).epsilon(1e-12));
  CHECK_THROWS_AS(slowest_second_moment(8, 9, 1.0), invalid_parameter_error);
}

TEST_CASE("enumerate_types") {
  auto v23 = enumerate_types(2, 3);
  REQUIRE(v23.size() == 4);
  CHECK(v23[0].nu == std::vector<int>{3, 0});
  CHECK(v23[1].nu == std::vector<int>{2, 1});
  CHECK(v23[2].nu == std::vector<int>{1, 2});
  CHECK(v23[3].nu == std::vector<int>{0, 3});

  auto v1 = enumerate_types(1, 5);
  REQUIRE(v1.size() == 1);
  CHECK(v1[0].nu == std::vector<int>{5});

  CHECK(enumerate_types(3, 2).size() == 6);
  // count = C(t+r-1, r-1)
  for (int r : {1, 2, 3, 4})
    for (int t : {0, 1, 2, 5})
      CHECK(enumerate_types(r, t).size() ==
            static_cast<std::size_t>(oracle::binomial(t + r - 1, r - 1) + 0.5));
}

TEST_CASE("type_partial_order") {
  ServiceTypeVector slowest{{3, 0}}, fastest{{0, 3}};
  CHECK(type_partial_order(slowest, fastest) == TypeOrder::a_slower);
  CHECK(type_partial_order(fastest, slowest) == TypeOrder::b_slower);
  CHECK(type_partial_order(slowest, slowest) == TypeOrder::equal);
  // suffix sums cross: incomparable
  CHECK(type_partial_order(ServiceTypeVector{{1, 0, 1}},
                           ServiceTypeVector{{0, 2, 0}}) ==
        TypeOrder::incomparable);
  CHECK_THROWS_AS(type_partial_order(ServiceTypeVector{{1, 0}},
                                     ServiceTypeVector{{0, 2}}),
                  invalid_parameter_error);
}

TEST_CASE("partial order is consistent with stochastic order on a grid") {
  std::mt19937 gen(11);
  for (int trial = 0; trial < 60; ++trial) {
    int r = 2 + gen() % 2;
    int t = 1 + gen() % 3;
    auto types = enumerate_types(r, t);
    const auto& a = types[gen() % types.size()];
    const auto& b = types[gen() % types.size()];
    TypeOrder ord = type_partial_order(a, b);
    bool a_ge = true, b_ge = true;  // pointwise survival dominance
    for (double s = 0.05; s < 8.0; s += 0.08) {
      double sa = type_survival(a, s, 1.0), sb = type_survival(b, s, 1.0);
      if (sa < sb - 1e-13) a_ge = false;
      if (sb < sa - 1e-13) b_ge = false;
    }
    if (ord == TypeOrder::a_slower) CHECK(a_ge);
    if (ord == TypeOrder::b_slower) CHECK(b_ge);
    if (ord == TypeOrder::equal) {
      CHECK(a_ge);
      CHECK(b_ge);
    }
  }
}
