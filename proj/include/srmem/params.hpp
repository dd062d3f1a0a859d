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

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

namespace srmem {

/// Thrown when a parameter set violates its invariants.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Rate constants of the read process. Any consistent unit system works;
/// the library is homogeneous in time. Internally everything is run in
/// Gamma units (gamma == 1), see to_gamma_units().
struct PhysicalParams {
  double omega0 = 0.0;  // Rabi frequency of the read beam
  double gamma = 1.0;   // single-atom decay rate
  double chi = 1.0;     // superradiance enhancement

  double collective_rate() const { return chi * gamma; }
};

/// Throws ParameterError unless gamma > 0, chi >= 1 and omega0 >= 0 (all finite).
void validate(const PhysicalParams& p);

/// Same physics with gamma == 1. Times must be multiplied by the original
/// gamma to be used with the returned parameters.
PhysicalParams to_gamma_units(const PhysicalParams& p);

enum class Regime { underdamped, critical, overdamped };

const char* to_string(Regime r);

/// Coefficients of the closed-form wavepackets; only defined for Omega^2 > 0.
struct ClosedFormCoefficients {
  double a = 0.0;   // single-photon normalization, chi*gamma*omega0^2/Omega^2
  double a1 = 0.0;  // first photon of a pair, 2 a omega0^2/Omega^2
  double b1 = 0.0;
  double c1 = 0.0;
  double a2 = 0.0;  // delay between the two photons
  double b2 = 0.0;
  double c2 = 0.0;
};

struct DerivedParams {
  Regime regime = Regime::underdamped;
  double omega_sq = 0.0;              // Omega^2 = omega0^2 - (chi*gamma/2)^2, signed
  std::complex<double> omega;         // real (under/critical) or purely imaginary
  std::complex<double> phi;           // sin(phi) = chi*gamma/(2*omega0)
  std::optional<ClosedFormCoefficients> closed_form;

  /// Real part of Omega; zero unless underdamped.
  double omega_real() const { return omega.real(); }
};

/// Relative width of the critical band: |Omega| < kCriticalBand * chi * gamma.
inline constexpr double kCriticalBand = 1e-6;

DerivedParams derive_params(const PhysicalParams& p);

/// Upper limit used for improper time integrals: the envelope of every
/// density is below `envelope_eps` beyond it.
double integration_horizon(const PhysicalParams& p, double envelope_eps = 1e-12);

/// Slowest decay rate of the amplitudes (alpha, beta).
double slow_amplitude_rate(const PhysicalParams& p);

}  // namespace srmem
