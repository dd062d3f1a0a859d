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

#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "srmem/kernels/kernels.hpp"
#include "srmem/params.hpp"

// Closed-form read-out model: collective amplitudes and photon-detection
// densities for one and two stored excitations.
//
// With alpha(0) = 1, beta(0) = 0 every amplitude stays real, so amplitudes
// are carried as doubles. All functions are pure and accept any consistent
// unit system (times in the inverse unit of the rates).

namespace srmem {

/// Amplitudes of |s_chi> and |e_chi> with one stored excitation.
struct AmplitudeState1 {
  double alpha = 1.0;
  double beta = 0.0;

  double norm_sq() const { return alpha * alpha + beta * beta; }
  std::complex<double> alpha_c() const { return alpha; }
  std::complex<double> beta_c() const { return beta; }
};

/// Amplitudes of |s s>, |s e>, |e e> with two stored excitations, before any
/// photon has been detected.
struct AmplitudeState2 {
  double lambda = 1.0;
  double mu = 0.0;
  double nu = 0.0;

  double norm_sq() const { return lambda * lambda + mu * mu + nu * nu; }
};

kernels::Propagator make_propagator(const PhysicalParams& p);

/// Evolution of an arbitrary single-excitation state over a time t >= 0.
AmplitudeState1 evolve_single(const PhysicalParams& p, AmplitudeState1 init, double t);

/// alpha(t), beta(t) from alpha(0) = 1, beta(0) = 0.
///   alpha = sec(phi) e^{-chi gamma t/4} cos(Omega t/2 - phi)
///   beta  = -sec(phi) e^{-chi gamma t/4} sin(Omega t/2)
/// The minus sign follows from beta' = -(omega0/2) alpha - (chi gamma/2) beta.
/// Overdamped and critical regimes use the analytic continuation.
AmplitudeState1 amplitude_single(const PhysicalParams& p, double t);

/// lambda = alpha^2, mu = sqrt(2) alpha beta, nu = beta^2.
AmplitudeState2 amplitude_double(const PhysicalParams& p, double t);

/// Single-photon detection density chi*gamma*|beta(t)|^2.
double rho1(const PhysicalParams& p, double t);

/// a e^{-chi gamma t/2} sin^2(Omega t/2). Underdamped only (throws std::domain_error).
double rho1_closed_form(const PhysicalParams& p, double t);

/// Probability that no photon has been emitted by t: |alpha|^2 + |beta|^2.
double survival_norm(const PhysicalParams& p, double t1);

/// First detection of a photon pair: chi*gamma*(|mu|^2 + 2|nu|^2).
double rho2_first(const PhysicalParams& p, double t1);

/// a1 e^{-chi gamma t} sin^2(Omega t/2)[1 + b1 sin(Omega t) + c1 cos(Omega t)].
/// Underdamped only.
double rho2_first_closed_form(const PhysicalParams& p, double t1);

/// Density of the second detection at t1 + tau given the first at t1.
double rho2_conditional(const PhysicalParams& p, double t1, double tau);

enum class JointForm {
  unordered,  // rho1(ta) rho1(tb), either order
  ordered,    // 2 rho1(ta) rho1(tb) for ta <= tb, zero otherwise
};

double rho2_joint(const PhysicalParams& p, double ta, double tb,
                  JointForm form = JointForm::unordered);

/// Density of the delay tau between the two detections,
/// 2 * int_0^inf rho1(t) rho1(t + tau) dt, valid in every regime.
double rho2_second_marginal(const PhysicalParams& p, double tau);

/// a2 e^{-chi gamma tau/2}[1 + b2 sin(Omega tau) + c2 cos(Omega tau)]. Underdamped only.
double rho2_second_marginal_closed_form(const PhysicalParams& p, double tau);

/// One-time marginal of the two-photon detection record, averaged over the
/// first and second photon. Equal to rho1 when emissions are independent.
double marginal_single_time(const PhysicalParams& p, double t);

/// int_0^inf alpha^{4-j} beta^j dt for j = 0..4, from alpha(0)=1, beta(0)=0.
/// Requires omega0 > 0.
std::array<double, 5> quartic_moments(const PhysicalParams& p);

/// The three wavepackets sampled on a time grid (vectorized path).
struct WavepacketCurves {
  std::vector<double> rho1;
  std::vector<double> rho2_first;
  std::vector<double> rho2_second_marginal;
};

WavepacketCurves evaluate_curves(const PhysicalParams& p, std::span<const double> t);

/// Batched single-density evaluation into `out` (same length as t).
enum class DensityKind { single, first, second_marginal };

const char* to_string(DensityKind k);

void evaluate_density(const PhysicalParams& p, DensityKind kind, std::span<const double> t,
                      std::span<double> out);

}  // namespace srmem
