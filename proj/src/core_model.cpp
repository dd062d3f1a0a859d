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

#include "srmem/core_model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "kernels/propagator_terms.hpp"

namespace srmem {
namespace {

const ClosedFormCoefficients& require_underdamped(const DerivedParams& d, const char* what) {
  if (!d.closed_form) {
    throw std::domain_error(std::string(what) + ": closed form defined only in the underdamped regime (regime is " +
                            to_string(d.regime) + ")");
  }
  return *d.closed_form;
}

void check_time(double t, const char* what) {
  if (!(t >= 0.0)) throw std::domain_error(std::string(what) + ": time must be >= 0");
}

// Direction of the no-jump state at t1, renormalized; safe for t1 far past
// the point where |alpha|^2 + |beta|^2 underflows.
AmplitudeState1 normalized_state_at(const PhysicalParams& p, double t1) {
  const double k = 0.25 * p.collective_rate();
  const double chunk = 200.0 / k;
  AmplitudeState1 s{1.0, 0.0};
  double remaining = t1;
  while (remaining > 0.0) {
    const double dt = std::min(chunk, remaining);
    s = evolve_single(p, s, dt);
    const double n = std::sqrt(s.norm_sq());
    if (n == 0.0) break;
    s.alpha /= n;
    s.beta /= n;
    remaining -= dt;
  }
  return s;
}

}  // namespace

kernels::Propagator make_propagator(const PhysicalParams& p) {
  validate(p);
  const double h = 0.5 * p.omega0;
  const double k = 0.25 * p.collective_rate();
  return {k, h, (h - k) * (h + k)};
}

AmplitudeState1 evolve_single(const PhysicalParams& p, AmplitudeState1 init, double t) {
  check_time(t, "evolve_single");
  const kernels::Propagator prop = make_propagator(p);
  const kernels::detail::DampedTerms e = kernels::detail::damped_terms(prop, t);
  const double ka = prop.k * init.alpha + prop.h * init.beta;
  const double kb = -prop.h * init.alpha - prop.k * init.beta;
  return {e.c * init.alpha + e.s * ka, e.c * init.beta + e.s * kb};
}

AmplitudeState1 amplitude_single(const PhysicalParams& p, double t) {
  return evolve_single(p, {1.0, 0.0}, t);
}

AmplitudeState2 amplitude_double(const PhysicalParams& p, double t) {
  const AmplitudeState1 s = amplitude_single(p, t);
  return {s.alpha * s.alpha, std::numbers::sqrt2 * s.alpha * s.beta, s.beta * s.beta};
}

double rho1(const PhysicalParams& p, double t) {
  const double b = amplitude_single(p, t).beta;
  return p.collective_rate() * b * b;
}

double rho1_closed_form(const PhysicalParams& p, double t) {
  check_time(t, "rho1_closed_form");
  const DerivedParams d = derive_params(p);
  const ClosedFormCoefficients& c = require_underdamped(d, "rho1_closed_form");
  const double s = std::sin(0.5 * d.omega_real() * t);
  return c.a * std::exp(-0.5 * p.collective_rate() * t) * s * s;
}

double survival_norm(const PhysicalParams& p, double t1) { return amplitude_single(p, t1).norm_sq(); }

double rho2_first(const PhysicalParams& p, double t1) {
  const AmplitudeState2 s = amplitude_double(p, t1);
  return p.collective_rate() * (s.mu * s.mu + 2.0 * s.nu * s.nu);
}

double rho2_first_closed_form(const PhysicalParams& p, double t1) {
  check_time(t1, "rho2_first_closed_form");
  const DerivedParams d = derive_params(p);
  const ClosedFormCoefficients& c = require_underdamped(d, "rho2_first_closed_form");
  const double om = d.omega_real();
  const double s = std::sin(0.5 * om * t1);
  return c.a1 * std::exp(-p.collective_rate() * t1) * s * s *
         (1.0 + c.b1 * std::sin(om * t1) + c.c1 * std::cos(om * t1));
}

double rho2_conditional(const PhysicalParams& p, double t1, double tau) {
  check_time(t1, "rho2_conditional");
  check_time(tau, "rho2_conditional");
  const AmplitudeState1 start = normalized_state_at(p, t1);
  const double b = evolve_single(p, start, tau).beta;
  return p.collective_rate() * b * b;
}

double rho2_joint(const PhysicalParams& p, double ta, double tb, JointForm form) {
  if (form == JointForm::ordered) {
    if (tb < ta) return 0.0;
    return 2.0 * rho1(p, ta) * rho1(p, tb);
  }
  return rho1(p, ta) * rho1(p, tb);
}

std::array<double, 5> quartic_moments(const PhysicalParams& p) {
  validate(p);
  if (p.omega0 <= 0.0) throw std::domain_error("quartic_moments: omega0 must be > 0");
  const double h = 0.5 * p.omega0;
  const double k = 0.25 * p.collective_rate();
  // d/dt a^{4-j} b^j = (4-j) h m_{j+1} - j h m_{j-1} - 2 j k m_j
  Eigen::Matrix<double, 5, 5> A = Eigen::Matrix<double, 5, 5>::Zero();
  for (int j = 0; j <= 4; ++j) {
    if (j < 4) A(j, j + 1) = (4 - j) * h;
    if (j > 0) A(j, j - 1) = -j * h;
    A(j, j) = -2.0 * j * k;
  }
  Eigen::Matrix<double, 5, 1> m0 = Eigen::Matrix<double, 5, 1>::Zero();
  m0(0) = 1.0;
  const Eigen::Matrix<double, 5, 1> m = -A.partialPivLu().solve(m0);
  return {m(0), m(1), m(2), m(3), m(4)};
}

double rho2_second_marginal(const PhysicalParams& p, double tau) {
  check_time(tau, "rho2_second_marginal");
  validate(p);
  if (p.omega0 == 0.0) return 0.0;
  const std::array<double, 5> m = quartic_moments(p);
  // beta(t + tau) = u21(tau) alpha(t) + u22(tau) beta(t)
  const double u21 = evolve_single(p, {1.0, 0.0}, tau).beta;
  const double u22 = evolve_single(p, {0.0, 1.0}, tau).beta;
  const double cg = p.collective_rate();
  const double v = 2.0 * cg * cg * (u21 * u21 * m[2] + 2.0 * u21 * u22 * m[3] + u22 * u22 * m[4]);
  return std::max(v, 0.0);
}

double rho2_second_marginal_closed_form(const PhysicalParams& p, double tau) {
  check_time(tau, "rho2_second_marginal_closed_form");
  const DerivedParams d = derive_params(p);
  const ClosedFormCoefficients& c = require_underdamped(d, "rho2_second_marginal_closed_form");
  const double om = d.omega_real();
  return c.a2 * std::exp(-0.5 * p.collective_rate() * tau) *
         (1.0 + c.b2 * std::sin(om * tau) + c.c2 * std::cos(om * tau));
}

double marginal_single_time(const PhysicalParams& p, double t) {
  const double r1 = rho1(p, t);
  const double surv = survival_norm(p, t);
  const double first = rho2_first(p, t);
  // second photon at t: int_0^t 2 rho1(t1) rho1(t) dt1 = 2 rho1(t) (1 - S(t))
  const double second = 2.0 * r1 * (1.0 - surv);
  return 0.5 * (first + second);
}

const char* to_string(DensityKind k) {
  switch (k) {
    case DensityKind::single: return "single";
    case DensityKind::first: return "first";
    case DensityKind::second_marginal: return "second_marginal";
  }
  return "?";
}

void evaluate_density(const PhysicalParams& p, DensityKind kind, std::span<const double> t,
                      std::span<double> out) {
  if (out.size() < t.size()) throw std::invalid_argument("evaluate_density: output too short");
  const kernels::Propagator prop = make_propagator(p);
  const double cg = p.collective_rate();
  std::vector<double> a(t.size()), b(t.size());
  kernels::propagate(prop, 1.0, 0.0, t, a, b);
  switch (kind) {
    case DensityKind::single:
      for (std::size_t i = 0; i < t.size(); ++i) out[i] = cg * b[i] * b[i];
      break;
    case DensityKind::first:
      for (std::size_t i = 0; i < t.size(); ++i) {
        out[i] = 2.0 * cg * b[i] * b[i] * (a[i] * a[i] + b[i] * b[i]);
      }
      break;
    case DensityKind::second_marginal: {
      if (p.omega0 == 0.0) {
        std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(t.size()), 0.0);
        break;
      }
      const std::array<double, 5> m = quartic_moments(p);
      std::vector<double> a2(t.size()), b2(t.size());
      kernels::propagate(prop, 0.0, 1.0, t, a2, b2);
      for (std::size_t i = 0; i < t.size(); ++i) {
        const double u21 = b[i];
        const double u22 = b2[i];
        const double v = 2.0 * cg * cg * (u21 * u21 * m[2] + 2.0 * u21 * u22 * m[3] + u22 * u22 * m[4]);
        out[i] = std::max(v, 0.0);
      }
      break;
    }
  }
  // the read-out starts at t = 0
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] >= 0.0)) out[i] = 0.0;
  }
}

WavepacketCurves evaluate_curves(const PhysicalParams& p, std::span<const double> t) {
  WavepacketCurves c;
  c.rho1.resize(t.size());
  c.rho2_first.resize(t.size());
  c.rho2_second_marginal.resize(t.size());
  evaluate_density(p, DensityKind::single, t, c.rho1);
  evaluate_density(p, DensityKind::first, t, c.rho2_first);
  evaluate_density(p, DensityKind::second_marginal, t, c.rho2_second_marginal);
  return c;
}

}  // namespace srmem
