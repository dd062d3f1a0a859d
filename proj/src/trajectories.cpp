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

#include "srmem/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "kernels/propagator_terms.hpp"
#include "srmem/core_model.hpp"

namespace srmem {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// First t in [lo, hi] where the nonincreasing survival function drops to u,
// or nullopt when it is still above u at hi.
template <class Survival>
std::optional<double> first_crossing(const Survival& surv, double lo, double hi, double u, double res) {
  if (surv(hi) > u) return std::nullopt;
  while (hi - lo > res) {
    const double mid = 0.5 * (lo + hi);
    if (surv(mid) > u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct State1 {
  double a, b;
};

inline State1 propagate(const kernels::Propagator& prop, State1 s, double t) {
  const kernels::detail::DampedTerms e = kernels::detail::damped_terms(prop, t);
  const double ka = prop.k * s.a + prop.h * s.b;
  const double kb = -prop.h * s.a - prop.k * s.b;
  return {e.c * s.a + e.s * ka, e.c * s.b + e.s * kb};
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t substream) : seed_(seed), substream_(substream) {}

double RandomStream::uniform() {
  if (buffered_ == 0) {
    const Philox4x32::Counter ctr = {static_cast<std::uint32_t>(block_index_),
                                     static_cast<std::uint32_t>(block_index_ >> 32),
                                     static_cast<std::uint32_t>(substream_),
                                     static_cast<std::uint32_t>(substream_ >> 32)};
    const Philox4x32::Key key = {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
    buffer_ = Philox4x32::block(ctr, key);
    ++block_index_;
    buffered_ = 2;
  }
  const int w = 2 - buffered_;
  --buffered_;
  const std::uint64_t bits =
      (static_cast<std::uint64_t>(buffer_[2 * w]) << 32) | static_cast<std::uint64_t>(buffer_[2 * w + 1]);
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

const char* to_string(EmissionMode m) { return m == EmissionMode::single ? "single" : "double"; }

EmissionSampler::EmissionSampler(const PhysicalParams& p, SamplerOptions opts) : params_(p), opts_(opts) {
  validate(p);
  t_max_ = opts_.t_max > 0.0 ? opts_.t_max : 40.0 / p.collective_rate();
  if (!(opts_.resolution > 0.0 && opts_.resolution < 1e-3)) {
    throw std::invalid_argument("SamplerOptions.resolution must lie in (0, 1e-3)");
  }
  if (opts_.backend == PropagationBackend::ode) {
    ode_single_ = std::make_shared<const OdeSolution>(integrate_single(p, t_max_, opts_.ode));
    ode_pair_ = std::make_shared<const OdeSolution>(integrate_double(p, t_max_, opts_.ode));
  }
}

double EmissionSampler::censoring_probability_single() const { return survival_norm(params_, t_max_); }

EmissionRecord EmissionSampler::sample_single(RandomStream& rng) const {
  EmissionRecord rec;
  rec.seed_id = rng.substream();
  const double u = rng.uniform();
  const double res = opts_.resolution * t_max_;
  if (opts_.backend == PropagationBackend::ode) {
    const OdeSolution& sol = *ode_single_;
    rec.t1 = first_crossing([&](double t) { return sol.single_at(t).norm_sq(); }, 0.0, t_max_, u, res);
  } else {
    const kernels::Propagator prop = make_propagator(params_);
    rec.t1 = first_crossing(
        [&](double t) {
          const State1 s = propagate(prop, {1.0, 0.0}, t);
          return s.a * s.a + s.b * s.b;
        },
        0.0, t_max_, u, res);
  }
  rec.censored = !rec.t1.has_value();
  return rec;
}

EmissionRecord EmissionSampler::sample_double(RandomStream& rng) const {
  EmissionRecord rec;
  rec.seed_id = rng.substream();
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  const double res = opts_.resolution * t_max_;
  const kernels::Propagator prop = make_propagator(params_);

  // phase 1: two excitations, no detection yet
  AmplitudeState2 at_jump;
  if (opts_.backend == PropagationBackend::ode) {
    const OdeSolution& sol = *ode_pair_;
    rec.t1 = first_crossing([&](double t) { return sol.pair_at(t).norm_sq(); }, 0.0, t_max_, u1, res);
    if (rec.t1) at_jump = sol.pair_at(*rec.t1);
  } else {
    const auto pair_state = [&](double t) {
      const State1 s = propagate(prop, {1.0, 0.0}, t);
      return AmplitudeState2{s.a * s.a, std::numbers::sqrt2 * s.a * s.b, s.b * s.b};
    };
    rec.t1 = first_crossing([&](double t) { return pair_state(t).norm_sq(); }, 0.0, t_max_, u1, res);
    if (rec.t1) at_jump = pair_state(*rec.t1);
  }
  if (!rec.t1) {
    rec.censored = true;
    return rec;
  }

  // jump: the detected photon leaves (mu, sqrt2 nu) on (|s_chi>, |e_chi>)
  State1 psi{at_jump.mu, std::numbers::sqrt2 * at_jump.nu};
  const double n = std::hypot(psi.a, psi.b);
  if (!(n > 0.0)) {
    rec.censored = true;
    return rec;
  }
  psi.a /= n;
  psi.b /= n;

  // phase 2: one excitation from the collapsed state
  const double t1 = *rec.t1;
  const double span = t_max_ - t1;
  std::optional<double> tau;
  if (span > 0.0) {
    if (opts_.backend == PropagationBackend::ode) {
      OdeOptions o = opts_.ode;
      o.n_grid = 2;  // only the dense output is used
      const OdeSolution sol = integrate_single(params_, span, o, {psi.a, psi.b});
      tau = first_crossing([&](double t) { return sol.single_at(t).norm_sq(); }, 0.0, span, u2, res);
    } else {
      tau = first_crossing(
          [&](double t) {
            const State1 s = propagate(prop, psi, t);
            return s.a * s.a + s.b * s.b;
          },
          0.0, span, u2, res);
    }
  }
  if (!tau) {
    rec.censored = true;
    return rec;
  }
  // simultaneous detections are not resolved; keep t2 strictly after t1
  rec.t2 = std::max(t1 + *tau, t1 + res);
  return rec;
}

EmissionRecord sample_single(const PhysicalParams& p, RandomStream& rng, const SamplerOptions& opts) {
  return EmissionSampler(p, opts).sample_single(rng);
}

EmissionRecord sample_double(const PhysicalParams& p, RandomStream& rng, const SamplerOptions& opts) {
  return EmissionSampler(p, opts).sample_double(rng);
}

std::vector<EmissionRecord> run_ensemble(const PhysicalParams& p, std::size_t n, EmissionMode mode,
                                         std::uint64_t seed, const SamplerOptions& opts, unsigned workers) {
  if (n == 0) throw std::invalid_argument("run_ensemble: n must be >= 1");
  const EmissionSampler sampler(p, opts);
  std::vector<EmissionRecord> out(n);
  const auto fill = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      RandomStream rng(seed, i);
      out[i] = mode == EmissionMode::single ? sampler.sample_single(rng) : sampler.sample_double(rng);
    }
  };
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    fill(0, n);
    return out;
  }
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = n * w / workers;
      const std::size_t end = n * (w + 1) / workers;
      pool.emplace_back(fill, begin, end);
    }
  }
  return out;
}

std::vector<double> Histogram::density() const {
  std::vector<double> d(counts.size(), 0.0);
  if (total == 0) return d;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    d[i] = static_cast<double>(counts[i]) / (static_cast<double>(total) * (bin_edges[i + 1] - bin_edges[i]));
  }
  return d;
}

const char* to_string(Statistic s) {
  switch (s) {
    case Statistic::t1: return "t1";
    case Statistic::t2: return "t2";
    case Statistic::tau: return "tau";
    case Statistic::pooled: return "pooled";
  }
  return "?";
}

Histogram bin_records(std::span<const EmissionRecord> records, std::span<const double> bin_edges,
                      Statistic which) {
  if (bin_edges.size() < 2) throw std::invalid_argument("bin_records: need at least two edges");
  for (std::size_t i = 1; i < bin_edges.size(); ++i) {
    if (!(bin_edges[i] > bin_edges[i - 1])) {
      throw std::invalid_argument("bin_records: bin edges must be strictly increasing (edge " +
                                  std::to_string(i) + ")");
    }
  }
  Histogram h;
  h.bin_edges.assign(bin_edges.begin(), bin_edges.end());
  h.counts.assign(bin_edges.size() - 1, 0);
  const auto add = [&](std::optional<double> v) {
    ++h.total;
    if (!v) return;
    const double x = *v;
    if (x < bin_edges.front() || x >= bin_edges.back()) return;
    const auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), x);
    ++h.counts[static_cast<std::size_t>(it - bin_edges.begin()) - 1];
  };
  for (const EmissionRecord& r : records) {
    switch (which) {
      case Statistic::t1: add(r.t1); break;
      case Statistic::t2: add(r.t2); break;
      case Statistic::tau:
        add(r.t1 && r.t2 ? std::optional<double>(*r.t2 - *r.t1) : std::nullopt);
        break;
      case Statistic::pooled:
        add(r.t1);
        add(r.t2);
        break;
    }
  }
  return h;
}

std::vector<double> uniform_edges(double lo, double hi, std::size_t n_bins) {
  if (n_bins == 0 || !(hi > lo)) throw std::invalid_argument("uniform_edges: need n_bins >= 1 and hi > lo");
  std::vector<double> e(n_bins + 1);
  for (std::size_t i = 0; i <= n_bins; ++i) {
    e[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_bins);
  }
  e.back() = hi;
  return e;
}

}  // namespace srmem
