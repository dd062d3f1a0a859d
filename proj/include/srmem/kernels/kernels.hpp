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

#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel inner loops. Every kernel has a scalar reference
// implementation (kernels::scalar) and, on x86-64, an AVX2+FMA variant
// (kernels::avx2). The free functions in srmem::kernels dispatch to the best
// variant supported by the running CPU; tests pin a variant with ScopedIsa
// and check the two against each other.

namespace srmem::kernels {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);

/// True if the variant was compiled in and the CPU can run it.
bool supported(Isa isa);

/// Variant used by the dispatching entry points. Defaults to the widest
/// supported ISA; the SRMEM_ISA environment variable ("scalar", "avx2")
/// overrides the default at first use.
Isa active();

/// Pins the active variant for the lifetime of the object (not thread-safe;
/// meant for tests and benchmarks).
class ScopedIsa {
 public:
  explicit ScopedIsa(Isa isa);
  ~ScopedIsa();
  ScopedIsa(const ScopedIsa&) = delete;
  ScopedIsa& operator=(const ScopedIsa&) = delete;

 private:
  Isa previous_;
};

/// Linear 2x2 read-out propagator  x' = M x,  M = [[0, h], [-h, -2k]],
/// with h = omega0/2 and k = chi*gamma/4. Its exponential is
///   exp(M t) = e^{-k t} [ C(t) I + S(t) (M + k I) ],
/// C = cos(w t), S = sin(w t)/w with w^2 = h^2 - k^2 (cosh/sinh when w^2 < 0,
/// Taylor series when |w t| is tiny).
struct Propagator {
  double k = 0.0;
  double h = 0.0;
  double w_sq = 0.0;
};

/// Evolves (alpha0, beta0) to every time in `t`. Output spans must have t.size().
void propagate(const Propagator& prop, double alpha0, double beta0, std::span<const double> t,
               std::span<double> alpha, std::span<double> beta);

/// Structure-of-arrays view over weighted scatterers.
struct Scatterers {
  std::span<const double> x, y, z;
  std::span<const double> wr, wi;  // complex weights
  std::size_t size() const { return x.size(); }
};

/// For each wavevector q_j = (qx[j], qy[j], qz[j]) writes
///   out[j] = | sum_i w_i exp(i q_j . r_i) |^2.
void structure_factor(const Scatterers& s, std::span<const double> qx, std::span<const double> qy,
                      std::span<const double> qz, std::span<double> out);

/// Off-diagonal part of the full-sphere average of |sum_i w_i exp(i (kr - k).r_i)|^2
/// over directions of k with |k| = k_mag:
///   sum_{i != j} Re(w_i conj(w_j) exp(i kr.(r_i - r_j))) sin(k_mag d_ij)/(k_mag d_ij).
double pair_sinc_sum(const Scatterers& s, double k_mag, double krx, double kry, double krz);

namespace scalar {
void propagate(const Propagator& prop, double alpha0, double beta0, std::span<const double> t,
               std::span<double> alpha, std::span<double> beta);
void structure_factor(const Scatterers& s, std::span<const double> qx, std::span<const double> qy,
                      std::span<const double> qz, std::span<double> out);
double pair_sinc_sum(const Scatterers& s, double k_mag, double krx, double kry, double krz);
}  // namespace scalar

namespace avx2 {
void propagate(const Propagator& prop, double alpha0, double beta0, std::span<const double> t,
               std::span<double> alpha, std::span<double> beta);
void structure_factor(const Scatterers& s, std::span<const double> qx, std::span<const double> qy,
                      std::span<const double> qz, std::span<double> out);
double pair_sinc_sum(const Scatterers& s, double k_mag, double krx, double kry, double krz);

// Vector math exposed for equivalence tests: elementwise over spans.
void exp(std::span<const double> x, std::span<double> out);
void sincos(std::span<const double> x, std::span<double> s, std::span<double> c);
}  // namespace avx2

}  // namespace srmem::kernels
