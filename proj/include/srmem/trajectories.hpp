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
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "srmem/dynamics.hpp"
#include "srmem/params.hpp"

// Quantum-trajectory sampling of photon detection times. Between jumps the
// collective amplitudes follow the non-Hermitian no-jump evolution; a photon
// is detected when the squared norm first drops below a uniform variate.

namespace srmem {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key);
};

/// Uniform variates for one trajectory: keyed by the run seed, counter space
/// split by substream id, so trajectories never share draws.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t substream);

  /// Uniform double in the open interval (0, 1), 53 random bits.
  double uniform();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t substream() const { return substream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t substream_;
  std::uint64_t block_index_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;  // remaining 64-bit words in buffer_
};

struct EmissionRecord {
  std::uint64_t seed_id = 0;   // substream id of the trajectory
  std::optional<double> t1;    // first detection
  std::optional<double> t2;    // second detection (pair runs only)
  bool censored = false;       // some emission did not happen before the horizon
};

enum class EmissionMode { single, pair };

const char* to_string(EmissionMode m);

enum class PropagationBackend {
  analytic,  // closed-form 2x2 propagator
  ode,       // dense output of the Runge-Kutta integrator
};

struct SamplerOptions {
  double t_max = 0.0;              // absolute horizon; 0 selects 40/(chi gamma)
  double resolution = 1e-12;       // bisection stops at resolution * t_max
  PropagationBackend backend = PropagationBackend::analytic;
  OdeOptions ode;                  // used by the ode backend
};

/// Jump-time sampler for one parameter set. Immutable after construction and
/// safe to share between threads.
class EmissionSampler {
 public:
  explicit EmissionSampler(const PhysicalParams& p, SamplerOptions opts = {});

  EmissionRecord sample_single(RandomStream& rng) const;
  EmissionRecord sample_double(RandomStream& rng) const;

  const PhysicalParams& params() const { return params_; }
  double t_max() const { return t_max_; }

  /// Analytic probability that a single-excitation run is censored, S(t_max).
  double censoring_probability_single() const;

 private:
  PhysicalParams params_;
  SamplerOptions opts_;
  double t_max_;
  std::shared_ptr<const OdeSolution> ode_single_;
  std::shared_ptr<const OdeSolution> ode_pair_;
};

EmissionRecord sample_single(const PhysicalParams& p, RandomStream& rng, const SamplerOptions& opts = {});
EmissionRecord sample_double(const PhysicalParams& p, RandomStream& rng, const SamplerOptions& opts = {});

/// n independent trajectories; trajectory i uses substream i. The result does
/// not depend on `workers` (0 picks the hardware concurrency).
std::vector<EmissionRecord> run_ensemble(const PhysicalParams& p, std::size_t n, EmissionMode mode,
                                         std::uint64_t seed, const SamplerOptions& opts = {},
                                         unsigned workers = 1);

struct Histogram {
  std::vector<double> bin_edges;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;  // contributing values, including out-of-range ones

  std::size_t n_bins() const { return counts.size(); }
  /// counts / (total * width): an estimate of the sampled density.
  std::vector<double> density() const;
};

enum class Statistic { t1, t2, tau, pooled };

const char* to_string(Statistic s);

/// Bins the chosen statistic. Values outside the edges, or absent (censored),
/// are not counted but still contribute to `total`; pooled uses both t1 and
/// t2 so each record contributes two to `total`.
Histogram bin_records(std::span<const EmissionRecord> records, std::span<const double> bin_edges,
                      Statistic which);

/// n + 1 evenly spaced edges on [lo, hi].
std::vector<double> uniform_edges(double lo, double hi, std::size_t n_bins);

}  // namespace srmem
