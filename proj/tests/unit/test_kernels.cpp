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
#include <random>
#include <vector>

#include "oracles.hpp"
#include "srmem/core_model.hpp"
#include "srmem/kernels/kernels.hpp"

namespace k = srmem::kernels;

namespace {

struct Cloud {
  std::vector<double> x, y, z, wr, wi;
  k::Scatterers view() const { return {x, y, z, wr, wi}; }
};

Cloud random_cloud(std::size_t n, double extent, unsigned seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> pos(0.0, extent);
  std::uniform_real_distribution<double> w(-1.0, 1.0);
  Cloud c;
  for (std::size_t i = 0; i < n; ++i) {
    c.x.push_back(pos(g));
    c.y.push_back(pos(g));
    c.z.push_back(pos(g));
    c.wr.push_back(w(g));
    c.wi.push_back(w(g));
  }
  return c;
}

k::Propagator prop_for(double omega0, double cg) {
  const double h = 0.5 * omega0;
  const double kk = 0.25 * cg;
  return {kk, h, (h - kk) * (h + kk)};
}

}  // namespace

TEST_CASE("scalar propagate matches the matrix exponential") {
  const std::vector<std::pair<double, double>> cases = {
      {10.0, 4.0}, {2.0, 4.0}, {1.0, 4.0}, {0.5, 4.0}, {2.0 + 1e-9, 4.0}, {30.0, 1.0}};
  std::vector<double> t;
  for (int i = 0; i <= 200; ++i) t.push_back(0.05 * i);
  t.push_back(1e-9);
  for (const auto& [omega0, cg] : cases) {
    CAPTURE(omega0);
    std::vector<double> a(t.size()), b(t.size());
    k::scalar::propagate(prop_for(omega0, cg), 1.0, 0.0, t, a, b);
    const oracle::Rates r{omega0, 1.0, cg};
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto ref = oracle::amplitudes(r, t[i]);
      CHECK(a[i] == doctest::Approx(ref[0]).epsilon(1e-12).scale(1.0));
      CHECK(b[i] == doctest::Approx(ref[1]).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("dispatch and ScopedIsa") {
  CHECK(k::supported(k::Isa::scalar));
  CHECK(k::to_string(k::Isa::scalar) == "scalar");
  CHECK(k::to_string(k::Isa::avx2) == "avx2");
  {
    k::ScopedIsa pin(k::Isa::scalar);
    CHECK(k::active() == k::Isa::scalar);
  }
  if (!k::supported(k::Isa::avx2)) {
    CHECK_THROWS(k::ScopedIsa(k::Isa::avx2));
  }
}

TEST_CASE("span size mismatches are rejected") {
  std::vector<double> t(4, 0.0), a(3), b(4);
  CHECK_THROWS_AS(k::propagate(prop_for(1.0, 1.0), 1.0, 0.0, t, a, b), std::invalid_argument);
  const Cloud c = random_cloud(3, 1.0, 1);
  std::vector<double> q(5), out(4);
  CHECK_THROWS_AS(k::structure_factor(c.view(), q, q, q, out), std::invalid_argument);
}

TEST_CASE("structure factor and pair sum against direct complex arithmetic") {
  const Cloud c = random_cloud(37, 2.0, 7);
  std::vector<double> qx{0.0, 1.3, -2.0}, qy{0.0, 0.4, 5.0}, qz{0.0, -0.7, 1.0}, out(3);
  k::scalar::structure_factor(c.view(), qx, qy, qz, out);
  for (std::size_t j = 0; j < 3; ++j) {
    std::complex<double> s = 0.0;
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      s += std::complex<double>(c.wr[i], c.wi[i]) *
           std::exp(std::complex<double>(0.0, qx[j] * c.x[i] + qy[j] * c.y[i] + qz[j] * c.z[i]));
    }
    CHECK(out[j] == doctest::Approx(std::norm(s)).epsilon(1e-12));
  }

  const double kmag = 3.0;
  const double kr[3] = {0.3, -0.2, 2.9};
  double ref = 0.0;
  for (std::size_t i = 0; i < c.x.size(); ++i) {
    for (std::size_t j = 0; j < c.x.size(); ++j) {
      if (i == j) continue;
      const double dx = c.x[i] - c.x[j], dy = c.y[i] - c.y[j], dz = c.z[i] - c.z[j];
      const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
      const std::complex<double> w =
          std::complex<double>(c.wr[i], c.wi[i]) * std::conj(std::complex<double>(c.wr[j], c.wi[j]));
      ref += (w * std::exp(std::complex<double>(0.0, kr[0] * dx + kr[1] * dy + kr[2] * dz))).real() *
             std::sin(kmag * d) / (kmag * d);
    }
  }
  CHECK(k::scalar::pair_sinc_sum(c.view(), kmag, kr[0], kr[1], kr[2]) == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("avx2 variants agree with the scalar reference") {
  if (!k::supported(k::Isa::avx2)) {
    MESSAGE("avx2 not available on this machine; equivalence not exercised");
    return;
  }
  SUBCASE("exp and sincos") {
    std::vector<double> x;
    for (int i = -7000; i <= 7000; ++i) x.push_back(0.1 * i);
    for (double v : {1e-300, -1e-300, 0.0, 1e5, -1e5, 3.0e6, 700.0, -700.0, -745.0}) x.push_back(v);
    std::vector<double> e(x.size()), s(x.size()), c(x.size());
    k::avx2::exp(x, e);
    k::avx2::sincos(x, s, c);
    for (std::size_t i = 0; i < x.size(); ++i) {
      CAPTURE(x[i]);
      if (std::abs(x[i]) <= 700.0) CHECK(e[i] == doctest::Approx(std::exp(x[i])).epsilon(4e-15));
      CHECK(s[i] == doctest::Approx(std::sin(x[i])).epsilon(1e-14).scale(1e-16));
      CHECK(c[i] == doctest::Approx(std::cos(x[i])).epsilon(1e-14).scale(1e-16));
    }
  }
  SUBCASE("propagate") {
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> om(0.0, 30.0), cg(1.0, 12.0), tt(0.0, 20.0);
    for (int trial = 0; trial < 40; ++trial) {
      const k::Propagator p = prop_for(trial == 0 ? 2.0 : om(g), trial == 0 ? 4.0 : cg(g));
      std::vector<double> t(203);
      for (auto& v : t) v = tt(g);
      t[0] = 0.0;
      t[1] = 1e-12;
      std::vector<double> a1(t.size()), b1(t.size()), a2(t.size()), b2(t.size());
      k::scalar::propagate(p, 0.3, -0.8, t, a1, b1);
      k::avx2::propagate(p, 0.3, -0.8, t, a2, b2);
      for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(std::abs(a2[i] - a1[i]) <= 1e-14 * (1.0 + std::abs(a1[i])));
        CHECK(std::abs(b2[i] - b1[i]) <= 1e-14 * (1.0 + std::abs(b1[i])));
      }
    }
  }
  SUBCASE("structure factor and pair sum") {
    const Cloud c = random_cloud(1001, 5.0, 11);
    std::mt19937_64 g(5);
    std::normal_distribution<double> q(0.0, 3.0);
    std::vector<double> qx(97), qy(97), qz(97), o1(97), o2(97);
    for (std::size_t j = 0; j < qx.size(); ++j) qx[j] = q(g), qy[j] = q(g), qz[j] = q(g);
    k::scalar::structure_factor(c.view(), qx, qy, qz, o1);
    k::avx2::structure_factor(c.view(), qx, qy, qz, o2);
    double scale = 0.0;
    for (double v : o1) scale = std::max(scale, v);
    for (std::size_t j = 0; j < o1.size(); ++j) CHECK(std::abs(o2[j] - o1[j]) <= 1e-11 * scale);

    const double s1 = k::scalar::pair_sinc_sum(c.view(), 2.5, 0.1, 0.2, -2.4);
    const double s2 = k::avx2::pair_sinc_sum(c.view(), 2.5, 0.1, 0.2, -2.4);
    CHECK(std::abs(s1 - s2) <= 1e-11 * (1.0 + std::abs(s1)));
  }
  SUBCASE("coincident scatterers") {
    Cloud c;
    for (int i = 0; i < 9; ++i) {
      c.x.push_back(0.5), c.y.push_back(-0.25), c.z.push_back(1.0), c.wr.push_back(1.0 / 3.0), c.wi.push_back(0.0);
    }
    // 72 ordered pairs of weight 1/9 at zero separation
    CHECK(k::scalar::pair_sinc_sum(c.view(), 1.0, 0.0, 0.0, 1.0) == doctest::Approx(8.0).epsilon(1e-14));
    CHECK(k::avx2::pair_sinc_sum(c.view(), 1.0, 0.0, 0.0, 1.0) ==
          doctest::Approx(k::scalar::pair_sinc_sum(c.view(), 1.0, 0.0, 0.0, 1.0)).epsilon(1e-14));
  }
  SUBCASE("dispatch routes to the pinned variant") {
    k::ScopedIsa pin(k::Isa::avx2);
    CHECK(k::active() == k::Isa::avx2);
    const srmem::PhysicalParams p{10.0, 1.0, 4.0};
    std::vector<double> t{0.0, 0.1, 0.7, 3.0}, out(4);
    srmem::evaluate_density(p, srmem::DensityKind::single, t, out);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(out[i] == doctest::Approx(srmem::rho1(p, t[i])).epsilon(1e-13));
  }
}
