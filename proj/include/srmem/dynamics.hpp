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
#include <memory>
#include <stdexcept>
#include <vector>

#include "srmem/core_model.hpp"
#include "srmem/params.hpp"

// Numerical integration of the reduced amplitude equations
//   one excitation:   alpha' = (omega0/2) beta
//                     beta'  = -(omega0/2) alpha - (chi gamma/2) beta
//   two excitations:  lambda' = (omega0/sqrt2) mu
//                     mu'     = -(omega0/sqrt2) lambda + (omega0/sqrt2) nu - (chi gamma/2) mu
//                     nu'     = -(omega0/sqrt2) mu - chi gamma nu
// with an extra component accumulating the emitted probability. Dormand-Prince
// 5(4) with its 4th-order continuous extension; real arithmetic throughout.

namespace srmem {

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OdeOptions {
  double tol = 1e-10;          // relative and absolute tolerance, in [1e-14, 1e-3]
  std::size_t n_grid = 2000;   // uniform output points on [0, t_end], >= 2
  double min_step = 0.0;       // 0 selects 1e-14 * t_end
  std::size_t max_steps = 50'000'000;
};

enum class AmplitudeSystem { single, pair };

/// Piecewise continuous extension of an accepted-step sequence.
class DenseTrajectory {
 public:
  explicit DenseTrajectory(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t n_steps() const { return t0_.size(); }
  double t_begin() const { return t0_.empty() ? 0.0 : t0_.front(); }
  double t_end() const { return t0_.empty() ? 0.0 : t0_.back() + h_.back(); }

  /// Interpolated state at t in [t_begin, t_end]; writes dim() values.
  void evaluate(double t, double* out) const;

  void append(double t0, double h, const double* rcont);  // 5*dim coefficients

 private:
  std::size_t dim_;
  std::vector<double> t0_;
  std::vector<double> h_;
  std::vector<double> rcont_;
};

struct OdeSolution {
  AmplitudeSystem system = AmplitudeSystem::single;
  PhysicalParams params;
  std::vector<double> times;
  std::vector<AmplitudeState1> single;  // filled for AmplitudeSystem::single
  std::vector<AmplitudeState2> pair;    // filled for AmplitudeSystem::pair
  std::vector<double> emitted_prob;
  std::shared_ptr<const DenseTrajectory> dense;
  std::size_t n_accepted = 0;
  std::size_t n_rejected = 0;

  AmplitudeState1 single_at(double t) const;
  AmplitudeState2 pair_at(double t) const;
  double emitted_at(double t) const;
  /// Squared norm of the amplitudes at grid point i.
  double norm_sq(std::size_t i) const;
};

/// One stored excitation from an arbitrary initial state (default |s_chi>).
OdeSolution integrate_single(const PhysicalParams& p, double t_end, const OdeOptions& opts = {},
                             AmplitudeState1 init = {1.0, 0.0});

/// Two stored excitations from |s_chi s_chi>.
OdeSolution integrate_double(const PhysicalParams& p, double t_end, const OdeOptions& opts = {});

/// Emission density on the solution grid: chi gamma |beta|^2 for a single
/// excitation, chi gamma (|mu|^2 + 2|nu|^2) for a pair.
std::vector<double> emission_density(const OdeSolution& sol);

}  // namespace srmem
