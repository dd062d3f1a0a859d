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

#include "srmem/params.hpp"

#include <cmath>
#include <numbers>

namespace srmem {

void validate(const PhysicalParams& p) {
  if (!std::isfinite(p.omega0) || !std::isfinite(p.gamma) || !std::isfinite(p.chi)) {
    throw ParameterError("physical parameters must be finite");
  }
  if (p.gamma <= 0.0) throw ParameterError("gamma must be > 0, got " + std::to_string(p.gamma));
  if (p.chi < 1.0) throw ParameterError("chi must be >= 1, got " + std::to_string(p.chi));
  if (p.omega0 < 0.0) throw ParameterError("omega0 must be >= 0, got " + std::to_string(p.omega0));
}

PhysicalParams to_gamma_units(const PhysicalParams& p) {
  validate(p);
  return {p.omega0 / p.gamma, 1.0, p.chi};
}

const char* to_string(Regime r) {
  switch (r) {
    case Regime::underdamped: return "underdamped";
    case Regime::critical: return "critical";
    case Regime::overdamped: return "overdamped";
  }
  return "?";
}

DerivedParams derive_params(const PhysicalParams& p) {
  validate(p);
  const double cg = p.collective_rate();
  const double half = 0.5 * cg;
  DerivedParams d;
  // (omega0 - half)(omega0 + half) avoids cancellation near the critical point
  d.omega_sq = (p.omega0 - half) * (p.omega0 + half);
  const double abs_omega = std::sqrt(std::abs(d.omega_sq));
  if (abs_omega < kCriticalBand * cg) {
    d.regime = Regime::critical;
  } else if (d.omega_sq > 0.0) {
    d.regime = Regime::underdamped;
  } else {
    d.regime = Regime::overdamped;
  }
  d.omega = d.omega_sq >= 0.0 ? std::complex<double>(abs_omega, 0.0)
                              : std::complex<double>(0.0, abs_omega);

  if (p.omega0 == 0.0) {
    // sin(phi) -> infinity; keep the principal branch of asin at +inf
    d.phi = {std::numbers::pi / 2, -std::numeric_limits<double>::infinity()};
  } else {
    const double s = half / p.omega0;
    if (d.regime == Regime::critical || s <= 1.0) {
      d.phi = {std::asin(std::min(s, 1.0)), 0.0};
    } else {
      // asin(s) = pi/2 - i*acosh(s) for s > 1
      d.phi = {std::numbers::pi / 2, -std::acosh(s)};
    }
  }

  if (d.regime == Regime::underdamped) {
    const double w0sq = p.omega0 * p.omega0;
    const double om = abs_omega;
    ClosedFormCoefficients c;
    c.a = cg * w0sq / d.omega_sq;
    // 2 rho1 * survival carries a second sec^2(phi)
    c.a1 = 2.0 * c.a * w0sq / d.omega_sq;
    c.b1 = cg * om / (2.0 * w0sq);
    c.c1 = -cg * cg / (4.0 * w0sq);
    c.a2 = c.a * w0sq / (2.0 * (d.omega_sq + cg * cg));
    c.b2 = 3.0 * cg * om / (4.0 * w0sq);
    c.c2 = 3.0 * d.omega_sq / (2.0 * w0sq) - 1.0;
    d.closed_form = c;
  }
  return d;
}

double slow_amplitude_rate(const PhysicalParams& p) {
  const DerivedParams d = derive_params(p);
  const double k = 0.25 * p.collective_rate();
  if (d.regime == Regime::overdamped) {
    const double w = 0.5 * std::sqrt(-d.omega_sq);
    // k - w computed without cancellation: (k^2 - w^2)/(k + w) = omega0^2/4/(k + w)
    return 0.25 * p.omega0 * p.omega0 / (k + w);
  }
  return k;
}

double integration_horizon(const PhysicalParams& p, double envelope_eps) {
  const double cg = p.collective_rate();
  double t = 40.0 / cg;
  const double slow = slow_amplitude_rate(p);
  if (slow > 0.0) {
    // +10 e-folds absorbs the polynomial prefactor near critical damping
    t = std::max(t, (std::log(1.0 / envelope_eps) + 10.0) / (2.0 * slow));
  } else {
    t = std::numeric_limits<double>::infinity();
  }
  return t;
}

}  // namespace srmem
