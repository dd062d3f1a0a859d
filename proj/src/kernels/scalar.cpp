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

#include <cmath>
#include <cstddef>

#include "propagator_terms.hpp"
#include "srmem/kernels/kernels.hpp"

namespace srmem::kernels::scalar {

void propagate(const Propagator& prop, double alpha0, double beta0, std::span<const double> t,
               std::span<double> alpha, std::span<double> beta) {
  const double k = prop.k;
  const double h = prop.h;
  // U = e^{-kt}[C I + S (M + kI)],  M + kI = [[k, h], [-h, -k]]
  const double ka = k * alpha0 + h * beta0;
  const double kb = -h * alpha0 - k * beta0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const detail::DampedTerms e = detail::damped_terms(prop, t[i]);
    alpha[i] = e.c * alpha0 + e.s * ka;
    beta[i] = e.c * beta0 + e.s * kb;
  }
}

void structure_factor(const Scatterers& s, std::span<const double> qx, std::span<const double> qy,
                      std::span<const double> qz, std::span<double> out) {
  const std::size_t n = s.size();
  for (std::size_t j = 0; j < qx.size(); ++j) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ph = qx[j] * s.x[i] + qy[j] * s.y[i] + qz[j] * s.z[i];
      const double c = std::cos(ph);
      const double sn = std::sin(ph);
      re += s.wr[i] * c - s.wi[i] * sn;
      im += s.wr[i] * sn + s.wi[i] * c;
    }
    out[j] = re * re + im * im;
  }
}

double pair_sinc_sum(const Scatterers& s, double k_mag, double krx, double kry, double krz) {
  const std::size_t n = s.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = s.x[i] - s.x[j];
      const double dy = s.y[i] - s.y[j];
      const double dz = s.z[i] - s.z[j];
      const double kd = k_mag * std::sqrt(dx * dx + dy * dy + dz * dz);
      const double sinc = kd < 1e-4 ? 1.0 - kd * kd / 6.0 : std::sin(kd) / kd;
      const double ph = krx * dx + kry * dy + krz * dz;
      // w_i conj(w_j)
      const double ar = s.wr[i] * s.wr[j] + s.wi[i] * s.wi[j];
      const double ai = s.wi[i] * s.wr[j] - s.wr[i] * s.wi[j];
      row += (ar * std::cos(ph) - ai * std::sin(ph)) * sinc;
    }
    total += row;
  }
  return 2.0 * total;
}

}  // namespace srmem::kernels::scalar
