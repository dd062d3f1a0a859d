// Copyright 2026 The srmem Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "srmem/core_model.hpp"
#include "srmem/params.hpp"

using namespace srmem;

namespace {

oracle::Rates rates(const PhysicalParams& p) { return {p.omega0, p.gamma, p.chi}; }

const std::vector<PhysicalParams> kRegimes = {
    {10.0, 1.0, 4.0},        // underdamped, many oscillations
    {2.5, 1.0, 4.0},         // weakly underdamped
    {2.0, 1.0, 4.0},         // critical
    {2.0 + 1e-8, 1.0, 4.0},  // inside the critical band
    {1.2, 1.0, 4.0},         // overdamped
    {0.3, 2.0, 1.5},         // strongly overdamped, gamma != 1
};

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(validate(PhysicalParams{1.0, 1.0, 1.0}));
  CHECK_THROWS_AS(validate(PhysicalParams{1.0, 0.0, 1.0}), ParameterError);
  CHECK_THROWS_AS(validate(PhysicalParams{1.0, 1.0, 0.99}), ParameterError);
  CHECK_THROWS_AS(validate(PhysicalParams{-1.0, 1.0, 1.0}), ParameterError);
  CHECK_THROWS_AS(validate(PhysicalParams{std::nan(""), 1.0, 1.0}), ParameterError);
  CHECK_THROWS_AS(validate(PhysicalParams{1.0, std::numeric_limits<double>::infinity(), 1.0}), ParameterError);
}

TEST_CASE("gamma units") {
  const PhysicalParams p{4e8, 2.0 * std::numbers::pi * 6.07e6, 4.0};
  const PhysicalParams g = to_gamma_units(p);
  CHECK(g.gamma == 1.0);
  CHECK(g.chi == 4.0);
  CHECK(g.omega0 == doctest::Approx(p.omega0 / p.gamma).epsilon(1e-15));
  // densities scale as 1/time
  const double t = 7e-9;
  CHECK(rho1(p, t) == doctest::Approx(p.gamma * rho1(g, t * p.gamma)).epsilon(1e-12));
}

TEST_CASE("regime classification and coefficients") {
  CHECK(derive_params({10.0, 1.0, 4.0}).regime == Regime::underdamped);
  CHECK(derive_params({2.0, 1.0, 4.0}).regime == Regime::critical);
  CHECK(derive_params({1.0, 1.0, 4.0}).regime == Regime::overdamped);
  CHECK(std::string(to_string(Regime::overdamped)) == "overdamped");

  const PhysicalParams p{10.0, 1.0, 4.0};
  const DerivedParams d = derive_params(p);
  REQUIRE(d.closed_form.has_value());
  const double om2 = 100.0 - 4.0;
  CHECK(d.omega_sq == doctest::Approx(om2));
  CHECK(d.omega_real() == doctest::Approx(std::sqrt(om2)));
  CHECK(std::sin(d.phi.real()) == doctest::Approx(4.0 / 20.0));
  const ClosedFormCoefficients& c = *d.closed_form;
  CHECK(c.a == doctest::Approx(4.0 * 100.0 / om2));
  CHECK(c.a1 == doctest::Approx(2.0 * c.a * 100.0 / om2));
  CHECK(c.b1 == doctest::Approx(4.0 * std::sqrt(om2) / 200.0));
  CHECK(c.c1 == doctest::Approx(-16.0 / 400.0));
  CHECK(c.b2 == doctest::Approx(3.0 * 4.0 * std::sqrt(om2) / 400.0));
  CHECK(c.c2 == doctest::Approx(1.5 * om2 / 100.0 - 1.0));
  // a = chi gamma sec^2 phi
  CHECK(c.a == doctest::Approx(4.0 / std::pow(std::cos(d.phi.real()), 2)));

  CHECK_FALSE(derive_params({1.0, 1.0, 4.0}).closed_form.has_value());
  CHECK_THROWS_AS(rho1_closed_form({1.0, 1.0, 4.0}, 0.5), std::domain_error);
  CHECK_THROWS_AS(rho2_first_closed_form({2.0, 1.0, 4.0}, 0.5), std::domain_error);
  CHECK_THROWS_AS(rho2_second_marginal_closed_form({1.0, 1.0, 4.0}, 0.5), std::domain_error);
}

TEST_CASE("amplitudes against the matrix exponential in every regime") {
  for (const PhysicalParams& p : kRegimes) {
    CAPTURE(p.omega0);
    for (double t : {0.0, 1e-7, 0.01, 0.3, 1.0, 2.5, 7.0}) {
      const AmplitudeState1 s = amplitude_single(p, t);
      const auto ref = oracle::amplitudes(rates(p), t);
      CHECK(s.alpha == doctest::Approx(ref[0]).epsilon(1e-12).scale(1.0));
      CHECK(s.beta == doctest::Approx(ref[1]).epsilon(1e-12).scale(1.0));
      const AmplitudeState2 s2 = amplitude_double(p, t);
      const auto ref2 = oracle::pair_amplitudes(rates(p), t);
      CHECK(s2.lambda == doctest::Approx(ref2[0]).epsilon(1e-12).scale(1.0));
      CHECK(s2.mu == doctest::Approx(ref2[1]).epsilon(1e-12).scale(1.0));
      CHECK(s2.nu == doctest::Approx(ref2[2]).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("closed forms agree with the amplitude route") {
  const PhysicalParams p{7.3, 1.0, 3.1};
  for (double t = 0.0; t < 6.0; t += 0.137) {
    CHECK(rho1_closed_form(p, t) == doctest::Approx(rho1(p, t)).epsilon(1e-12).scale(1e-14));
    CHECK(rho2_first_closed_form(p, t) == doctest::Approx(rho2_first(p, t)).epsilon(1e-12).scale(1e-14));
    CHECK(rho2_second_marginal_closed_form(p, t) ==
          doctest::Approx(rho2_second_marginal(p, t)).epsilon(1e-12).scale(1e-14));
  }
}

TEST_CASE("critical damping reduces to the degenerate propagator") {
  const PhysicalParams p{2.0, 1.0, 4.0};  // h = k = 1
  for (double t : {0.0, 0.2, 1.0, 3.0, 9.0}) {
    // beta = -h t e^{-k t}
    const double b = -t * std::exp(-t);
    CHECK(rho1(p, t) == doctest::Approx(4.0 * b * b).epsilon(1e-13).scale(1e-15));
  }
  // continuity across the band edge
  const double t = 1.7;
  CHECK(rho1({2.0 * (1.0 + 1e-5), 1.0, 4.0}, t) == doctest::Approx(rho1(p, t)).epsilon(1e-4));
  CHECK(rho1({2.0 * (1.0 - 1e-5), 1.0, 4.0}, t) == doctest::Approx(rho1(p, t)).epsilon(1e-4));
}

TEST_CASE("survival decreases at the emission rate") {
  for (const PhysicalParams& p : kRegimes) {
    for (double t : {0.1, 0.8, 2.0}) {
      const double h = 1e-6;
      const double dS = (survival_norm(p, t + h) - survival_norm(p, t - h)) / (2.0 * h);
      CHECK(-dS == doctest::Approx(rho1(p, t)).epsilon(1e-7).scale(1e-9));
    }
  }
}

TEST_CASE("densities are normalized in every regime") {
  for (const PhysicalParams& p : kRegimes) {
    CAPTURE(p.omega0);
    const oracle::Rates r = rates(p);
    const double scale = std::min(1.0 / r.cg(), p.omega0 > 0 ? 1.0 / p.omega0 : 1.0);
    CHECK(oracle::integrate_to_infinity([&](double t) { return rho1(p, t); }, scale, r) ==
          doctest::Approx(1.0).epsilon(1e-9));
    CHECK(oracle::integrate_to_infinity([&](double t) { return rho2_first(p, t); }, scale, r) ==
          doctest::Approx(1.0).epsilon(1e-9));
    CHECK(oracle::integrate_to_infinity([&](double t) { return rho2_second_marginal(p, t); }, scale, r) ==
          doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("second marginal equals the autocorrelation of rho1") {
  for (const PhysicalParams& p : {kRegimes[0], kRegimes[2], kRegimes[4]}) {
    CAPTURE(p.omega0);
    for (double tau : {0.0, 0.15, 0.6, 1.9, 4.0}) {
      CHECK(rho2_second_marginal(p, tau) == doctest::Approx(oracle::convolution(rates(p), tau)).epsilon(1e-9).scale(1e-12));
    }
  }
}

TEST_CASE("conditional density of the second photon") {
  const PhysicalParams p{6.0, 1.0, 2.5};
  for (double t1 : {0.0, 0.4, 1.3, 60.0}) {
    // normalized over tau
    const double total = oracle::integrate_to_infinity([&](double tau) { return rho2_conditional(p, t1, tau); },
                                                       0.1, rates(p));
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
  // first-photon density times conditional = ordered joint density
  for (double t1 : {0.2, 0.9}) {
    for (double tau : {0.05, 0.5, 2.0}) {
      CHECK(rho2_first(p, t1) * rho2_conditional(p, t1, tau) ==
            doctest::Approx(rho2_joint(p, t1, t1 + tau, JointForm::ordered)).epsilon(1e-11));
    }
  }
  CHECK(rho2_joint(p, 1.0, 0.5, JointForm::ordered) == 0.0);
  CHECK(rho2_joint(p, 1.0, 0.5, JointForm::unordered) == doctest::Approx(rho1(p, 1.0) * rho1(p, 0.5)));
  CHECK_THROWS_AS(rho2_conditional(p, -1.0, 0.0), std::domain_error);
}

TEST_CASE("one-time marginal of the pair record equals rho1") {
  for (const PhysicalParams& p : kRegimes) {
    for (double t : {0.0, 0.3, 1.1, 4.0}) {
      CHECK(marginal_single_time(p, t) == doctest::Approx(rho1(p, t)).epsilon(1e-12).scale(1e-15));
    }
  }
}

TEST_CASE("vectorized evaluation matches pointwise functions") {
  for (const PhysicalParams& p : kRegimes) {
    std::vector<double> t;
    for (int i = -3; i < 400; ++i) t.push_back(0.02 * i);
    const WavepacketCurves c = evaluate_curves(p, t);
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] < 0.0) {
        CHECK(c.rho1[i] == 0.0);
        CHECK(c.rho2_first[i] == 0.0);
        CHECK(c.rho2_second_marginal[i] == 0.0);
        continue;
      }
      CHECK(c.rho1[i] == doctest::Approx(rho1(p, t[i])).epsilon(1e-12).scale(1e-15));
      CHECK(c.rho2_first[i] == doctest::Approx(rho2_first(p, t[i])).epsilon(1e-12).scale(1e-15));
      CHECK(c.rho2_second_marginal[i] == doctest::Approx(rho2_second_marginal(p, t[i])).epsilon(1e-12).scale(1e-15));
    }
  }
  std::vector<double> t(3), out(2);
  CHECK_THROWS_AS(evaluate_density({1.0, 1.0, 1.0}, DensityKind::single, t, out), std::invalid_argument);
}

TEST_CASE("integration horizon leaves negligible survival") {
  for (const PhysicalParams& p : kRegimes) {
    const double T = integration_horizon(p);
    CHECK(T >= 40.0 / p.collective_rate());
    CHECK(survival_norm(p, T) < 1e-12);
  }
}

TEST_CASE("survival is bounded by its envelope maximum") {
  // S e^{chi gamma t / 2} = 1 + (k/w) sin 2wt + (k/w)^2 (1 - cos 2wt) peaks at
  // sec^2 phi + tan phi sec phi.
  const PhysicalParams p{3.0, 1.0, 4.0};
  const double phi = std::asin(4.0 / 6.0);
  const double bound = 1.0 / std::pow(std::cos(phi), 2) + std::tan(phi) / std::cos(phi);
  double worst = 0.0;
  for (double t = 0.0; t < 20.0; t += 1e-3) worst = std::max(worst, survival_norm(p, t) * std::exp(2.0 * t));
  CHECK(worst <= bound * (1.0 + 1e-12));
  CHECK(worst > bound * (1.0 - 1e-5));
}
