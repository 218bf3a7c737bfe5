#include <doctest.h>

#include <cmath>
#include <random>

#include "bound_oracle.hpp"
#include "decoy_analysis.hpp"
#include "error.hpp"
#include "support.hpp"

using namespace qkdnet;
using qkdnet::test::rel_err;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::internal;
}

}  // namespace

TEST_SUITE("decoy-analysis") {
  TEST_CASE("binary entropy endpoints and reference value") {
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(rel_err(binary_entropy(0.0158), 0.11715966825596798) < 1e-13);
    CHECK(code_of([] { binary_entropy(-0.01); }) == ErrorCode::domain);
    CHECK(code_of([] { binary_entropy(1.01); }) == ErrorCode::domain);
  }

  TEST_CASE("binary entropy is symmetric") {
    for (double x = 0.01; x < 0.5; x += 0.01) CHECK(binary_entropy(x) == doctest::Approx(binary_entropy(1 - x)));
  }

  TEST_CASE("fluctuation bounds at k = 0 are the point estimates") {
    const MeasuredStats s = test::meilan_stats();
    const FluctuationBounds b = fluctuation_bounds(s, 0.0);
    CHECK(b.q_nu_lower == s.q_nu);
    CHECK(b.y0_lower == s.y0);
    CHECK(b.y0_upper == s.y0);
  }

  TEST_CASE("fluctuation bounds on the Meilan budget") {
    const FluctuationBounds b = fluctuation_bounds(test::meilan_stats(), 10.0);
    CHECK(rel_err(b.q_nu_lower, 0.0026688448059171144) < 1e-13);
    CHECK(rel_err(b.y0_lower, 0.00019173611967393119) < 1e-13);
    CHECK(rel_err(b.y0_upper, 0.00021426388032606881) < 1e-13);
  }

  TEST_CASE("zero vacuum yield falls back to the zero-count allowance") {
    MeasuredStats s = test::meilan_stats();
    s.y0 = 0.0;
    const FluctuationBounds b = fluctuation_bounds(s, 10.0);
    CHECK(b.y0_lower == 0.0);
    CHECK(b.y0_upper == doctest::Approx(100.0 / s.n_0));
  }

  TEST_CASE("insufficient decoy data") {
    MeasuredStats s = test::meilan_stats();
    s.n_nu = 0.0;
    CHECK(code_of([&] { fluctuation_bounds(s, 10.0); }) == ErrorCode::insufficient_decoy_data);
    s = test::meilan_stats();
    s.q_nu = 0.0;
    CHECK(code_of([&] { key_rate(s, RateSettings{}); }) == ErrorCode::insufficient_decoy_data);
    s = test::meilan_stats();
    s.n_0 = 0.0;
    CHECK(code_of([&] { key_rate(s, RateSettings{}); }) == ErrorCode::insufficient_decoy_data);
  }

  TEST_CASE("single-photon bounds, asymptotic") {
    RateSettings rs;
    rs.k_sigma = 0.0;
    const SinglePhotonBounds m = single_photon_bounds(test::meilan_stats(), rs);
    CHECK(rel_err(m.q1_lower, 3.623917912896271e-3) < 1e-12);
    CHECK(rel_err(m.e1_upper, 0.02042364664858093) < 1e-12);
    const SinglePhotonBounds f = single_photon_bounds(test::feixi_stats(), rs);
    CHECK(rel_err(f.q1_lower, 1.146044250774398728e-4) < 1e-12);
    CHECK(rel_err(f.e1_upper, 0.01346476302781646982) < 1e-12);
  }

  TEST_CASE("key rate, Meilan with finite-size bounds") {
    const DecoyEstimate e = key_rate(test::meilan_stats(), RateSettings{});
    CHECK(rel_err(e.q1_lower, 0.0034750487363690969) < 1e-12);
    CHECK(rel_err(e.e1_upper, 0.022188032192111781) < 1e-12);
    CHECK(rel_err(e.rate_per_pulse, 0.00066297797952561831) < 1e-12);
    CHECK(rate_bps(e, 4e6, 0.8) == doctest::Approx(2121.529).epsilon(1e-5));
  }

  TEST_CASE("key rate, Feixi with finite-size bounds") {
    const DecoyEstimate e = key_rate(test::feixi_stats(), RateSettings{});
    CHECK(rel_err(e.q_nu_lower, 6.5281929669182742e-05) < 1e-12);
    CHECK(rel_err(e.y0_lower, 1.0360418976351694e-06) < 1e-12);
    CHECK(rel_err(e.y0_upper, 1.2239581023648308e-06) < 1e-12);
    CHECK(rel_err(e.q1_lower, 1.1223214766046122e-04) < 1e-12);
    CHECK(rel_err(e.e1_upper, 0.01397909697224085) < 1e-12);
    CHECK(rel_err(e.rate_per_pulse, 3.0920046414961808e-05) < 1e-12);
  }

  TEST_CASE("key rate, Meilan asymptotic") {
    RateSettings rs;
    rs.k_sigma = 0.0;
    const DecoyEstimate e = key_rate(test::meilan_stats(), rs);
    CHECK(rel_err(e.rate_per_pulse, 7.234717718104574e-4) < 1e-12);
  }

  TEST_CASE("vanishing entropy terms leave q * Q1") {
    MeasuredStats s = test::meilan_stats();
    s.e_mu = 0.0;
    s.y0 = 0.0;
    RateSettings rs;
    rs.k_sigma = 0.0;
    const DecoyEstimate e = key_rate(s, rs);
    CHECK(e.e1_upper == 0.0);
    CHECK(e.rate_per_pulse == doctest::Approx(rs.q * e.q1_lower).epsilon(1e-14));
  }

  TEST_CASE("Q1 clamps at zero and forces the worst-case error") {
    MeasuredStats s = test::meilan_stats();
    s.q_nu = 1.0e-3;  // far too few decoy clicks for the signal gain
    const DecoyEstimate e = key_rate(s, RateSettings{});
    CHECK(e.q1_lower == 0.0);
    CHECK(e.e1_upper == 0.5);
    CHECK(e.rate_per_pulse == 0.0);
  }

  TEST_CASE("invalid inputs") {
    MeasuredStats s = test::meilan_stats();
    s.mu = 0.2;
    CHECK(code_of([&] { key_rate(s, RateSettings{}); }) == ErrorCode::invalid_intensity_ordering);
    s = test::meilan_stats();
    s.e_mu = 0.6;
    CHECK(code_of([&] { key_rate(s, RateSettings{}); }) == ErrorCode::domain);
    s = test::meilan_stats();
    s.q_mu = 1.5;
    CHECK(code_of([&] { key_rate(s, RateSettings{}); }) == ErrorCode::domain);
    RateSettings rs;
    rs.f = 0.9;
    CHECK(code_of([&] { key_rate(test::meilan_stats(), rs); }) == ErrorCode::domain);
    rs = RateSettings{};
    rs.q = 0.0;
    CHECK(code_of([&] { key_rate(test::meilan_stats(), rs); }) == ErrorCode::domain);
  }

  TEST_CASE("confidence level") {
    CHECK(confidence_level(0.0) == 0.5);
    CHECK(rel_err(confidence_tail(10.0), 7.619853024160526e-24) < 1e-10);
    CHECK(confidence_level(10.0) > confidence_level(3.0));
    const DecoyEstimate e = key_rate(test::meilan_stats(), RateSettings{});
    CHECK(e.confidence_tail == confidence_tail(10.0));
  }

  TEST_CASE("bound ordering on random valid stats") {
    std::mt19937_64 g(7);
    for (int i = 0; i < 500; ++i) {
      const MeasuredStats s = test::random_stats(g);
      const DecoyEstimate e = key_rate(s, RateSettings{});
      CHECK(e.q_nu_lower <= s.q_nu);
      CHECK(e.y0_lower <= s.y0);
      CHECK(s.y0 <= e.y0_upper);
      CHECK(e.q1_lower >= 0.0);
      CHECK(e.q1_lower <= s.q_mu);
      CHECK(e.e1_upper >= 0.0);
      CHECK(e.e1_upper <= 0.5);
      CHECK(e.rate_per_pulse >= 0.0);
    }
  }

  TEST_CASE("monotone in k_sigma, f and E_mu") {
    std::mt19937_64 g(11);
    for (int i = 0; i < 200; ++i) {
      const MeasuredStats s = test::random_stats(g);
      RateSettings lo, hi;
      lo.k_sigma = 3.0;
      hi.k_sigma = 10.0;
      const DecoyEstimate a = key_rate(s, lo), b = key_rate(s, hi);
      CHECK(b.q1_lower <= a.q1_lower);
      CHECK(b.rate_per_pulse <= a.rate_per_pulse);

      RateSettings f2;
      f2.f = 1.5;
      CHECK(key_rate(s, f2).rate_per_pulse <= key_rate(s, RateSettings{}).rate_per_pulse);

      MeasuredStats worse = s;
      worse.e_mu = std::min(0.5, s.e_mu * 1.2 + 1e-4);
      CHECK(key_rate(worse, RateSettings{}).rate_per_pulse <= key_rate(s, RateSettings{}).rate_per_pulse);
    }
  }

  TEST_CASE("noiseless single-photon-like stats keep Q1 below Q_mu") {
    for (double eta : {1e-4, 1e-3, 1e-2, 0.1, 0.5}) {
      MeasuredStats s;
      s.y0 = 0.0;
      s.q_mu = -std::expm1(-eta * s.mu);
      s.q_nu = -std::expm1(-eta * s.nu);
      s.n_mu = s.n_nu = s.n_0 = 1e9;
      RateSettings rs;
      rs.k_sigma = 0.0;
      CHECK(single_photon_bounds(s, rs).q1_lower <= s.q_mu);
    }
  }

  TEST_CASE("matches the straight-line oracle") {
    std::mt19937_64 g(3);
    for (int i = 0; i < 1000; ++i) {
      const MeasuredStats s = test::random_stats(g);
      const DecoyEstimate e = key_rate(s, RateSettings{});
      const test::OracleOut o = test::oracle_rate(s, 1.22, 0.375, 10.0);
      auto close = [](double got, long double want) {
        return want == 0.0L ? got == 0.0 : rel_err(got, (double)want) < 1e-12;
      };
      CHECK(close(e.q1_lower, o.q1_l));
      CHECK(close(e.e1_upper, o.e1_u));
      CHECK(close(e.rate_per_pulse, o.rate));
    }
  }
}
