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
#include <cstddef>
#include <cstdint>
#include <vector>

// Collective enhancement chi of the read-out emission rate from the geometry
// of the stored spin wave. Three routes: a paraxial closed form, quadrature of
// the Gaussian mode over a small cap of emission directions, and a discrete
// double sum over sampled atoms.

namespace srmem {

struct ModeGeometry {
  double w0 = 0.0;     // mode waist, m
  double k_ge = 0.0;   // emission wavenumber, 1/m
  double n_eff = 0.0;  // effective atom number

  /// 1/(w0 k_ge) < 0.1
  bool paraxial() const { return w0 * k_ge > 10.0; }
};

/// Throws ParameterError unless w0, k_ge > 0 and n_eff >= 0, all finite.
void validate(const ModeGeometry& g);

/// 1 + n_eff / (2 w0^2 k_ge^2)
double chi_closed_form(const ModeGeometry& g);

struct CapQuadratureResult {
  double chi = 1.0;
  double cap_half_angle = 0.0;  // radians, as used
  double abs_error = 0.0;       // quadrature error estimate on chi
  bool truncated = false;       // cap narrower than 5/(w0 k_ge): mode cut off
};

/// 1 + (1/4 pi k^2) * integral over the cap of |Phi(k)|^2 with the paraxial
/// Gaussian mode profile Phi = C exp(-(kx^2 + ky^2) w0^2 / 4), |C|^2 = n_eff.
/// cap_half_angle = 0 picks 10/(w0 k_ge) (capped below pi/2).
CapQuadratureResult chi_cap_quadrature(const ModeGeometry& g, double cap_half_angle = 0.0);

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
double norm(Vec3 a);

/// Atoms carrying the stored excitation. Weights are the per-atom amplitudes
/// alpha_i (sum |alpha_i|^2 = 1); k_r is the read beam and k_1 the field-1
/// wavevector, so the read-out is phase matched around -k_1.
struct AtomCloud {
  std::vector<Vec3> positions;
  std::vector<std::complex<double>> weights;
  Vec3 k_r;
  Vec3 k_1;

  std::size_t size() const { return positions.size(); }
};

/// Throws ParameterError on empty or mismatched arrays, non-finite positions,
/// zero k_1, or weights not normalized to 1e-12.
void validate(const AtomCloud& c);

/// Scales the weights so that sum |alpha_i|^2 = 1.
void normalize_weights(AtomCloud& c);

/// (sum |alpha_i|)^2
double effective_atom_number(const AtomCloud& c);

struct GaussianCloudSpec {
  std::size_t n_atoms = 10000;
  double w0 = 0.0;          // mode waist, m
  double k_ge = 0.0;        // 1/m
  double sigma_perp = 0.0;  // rms transverse cloud radius (per axis), m
  double sigma_z = 0.0;     // rms axial cloud length, m
  double write_angle = 0.05;  // angle between write beam and field 1, rad
  std::uint64_t seed = 1;
};

/// Samples atom positions from a Gaussian density and assigns the spin-wave
/// amplitudes alpha_i ~ exp(-(x^2 + y^2)/w0^2) exp(i (k_w - k_1).r_i), with
/// k_1 = k_ge z, k_w tilted by write_angle in the x-z plane and k_r = -k_w.
AtomCloud make_gaussian_cloud(const GaussianCloudSpec& spec);

struct DiscreteChiOptions {
  std::size_t n_directions = 20000;  // Monte Carlo directions off the cap, >= 1e4
  double cap_half_angle = 0.0;       // 0 picks 10 / (k_ge * rms transverse size of the weights)
  std::size_t cap_phi_nodes = 128;   // azimuthal nodes; the polar angle uses 64 Gauss-Legendre nodes
  std::uint64_t seed = 1;
};

struct DiscreteChiResult {
  double chi = 1.0;
  double std_error = 0.0;       // Monte Carlo standard error of the off-cap part
  double cap_part = 0.0;        // off-diagonal contribution from the cap
  double remainder_part = 0.0;  // off-diagonal contribution from the rest of the sphere
  double cap_half_angle = 0.0;
  std::size_t n_directions = 0;  // off-cap directions actually sampled
};

/// chi = 1 + (1/4 pi) * surface integral of (|S(k)|^2 - 1) over |k| = k_ge,
/// S(k) = sum_i alpha_i exp(i (k_r - k).r_i). The diagonal gives exactly 1;
/// the rest is integrated on a polar grid over the cap around -k_1 plus
/// stratified Monte Carlo (two samples per stratum) over the remainder.
DiscreteChiResult chi_discrete(const AtomCloud& c, double k_ge, const DiscreteChiOptions& opts = {});

/// Same quantity with the direction integral done in closed form:
/// 1 + sum_{i != j} Re(alpha_i conj(alpha_j) e^{i k_r.(r_i - r_j)}) sinc(k_ge |r_i - r_j|).
double chi_full_sphere(const AtomCloud& c, double k_ge);

/// 1 + (chi_ref - 1) * od_new / od_ref
double chi_from_od(double chi_ref, double od_ref, double od_new);

/// |S(k)|^2 on a polar grid around -k_1, for inspection.
struct PhiMap {
  std::vector<double> theta;  // polar angle from -k_1, rad
  std::vector<double> phi;    // azimuth, rad
  std::vector<double> intensity;
};

PhiMap phi_map(const AtomCloud& c, double k_ge, double half_angle, std::size_t n_theta, std::size_t n_phi);

}  // namespace srmem
