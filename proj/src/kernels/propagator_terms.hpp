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

#include <cmath>

#include "srmem/kernels/kernels.hpp"

namespace srmem::kernels::detail {

/// Below this |w t| the trigonometric/hyperbolic forms give way to a series.
inline constexpr double kSeriesThreshold = 1e-3;

struct DampedTerms {
  double c;  // e^{-kt} C(t)
  double s;  // e^{-kt} S(t)
};

inline DampedTerms series_terms(double w_sq, double k, double t) {
  const double u = w_sq * t * t;
  const double c = 1.0 - u / 2.0 + u * u / 24.0 - u * u * u / 720.0;
  const double s = t * (1.0 - u / 6.0 + u * u / 120.0 - u * u * u / 5040.0);
  const double e = std::exp(-k * t);
  return {e * c, e * s};
}

inline DampedTerms damped_terms(const Propagator& p, double t) {
  const double w = std::sqrt(std::abs(p.w_sq));
  if (w * t < kSeriesThreshold) return series_terms(p.w_sq, p.k, t);
  if (p.w_sq > 0.0) {
    const double e = std::exp(-p.k * t);
    return {e * std::cos(w * t), e * std::sin(w * t) / w};
  }
  // e^{-kt} cosh(wt), e^{-kt} sinh(wt)/w from the two real exponents; w - k = -h^2/(w + k)
  const double slow = std::exp(-p.h * p.h / (w + p.k) * t);
  const double fast = std::exp(-(w + p.k) * t);
  return {0.5 * (slow + fast), 0.5 * (slow - fast) / w};
}

}  // namespace srmem::kernels::detail
