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

#include "srmem/dynamics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace srmem {
namespace {

// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

template <std::size_t N>
using Vec = std::array<double, N>;

// Linear amplitude part x' = A x plus the emission-rate quadratic form.
template <std::size_t N>
struct System {
  std::array<std::array<double, N - 1>, N - 1> A{};
  std::array<double, N - 1> emit{};  // E' = sum_i emit_i x_i^2

  Vec<N> operator()(const Vec<N>& y) const {
    Vec<N> d{};
    double e = 0.0;
    for (std::size_t i = 0; i + 1 < N; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j + 1 < N; ++j) s += A[i][j] * y[j];
      d[i] = s;
      e += emit[i] * y[i] * y[i];
    }
    d[N - 1] = e;
    return d;
  }

  double stiffness_ratio() const {
    constexpr int M = static_cast<int>(N - 1);
    Eigen::Matrix<double, M, M> m;
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) m(i, j) = A[i][j];
    const auto ev = m.eigenvalues();
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int i = 0; i < M; ++i) {
      const double r = std::abs(ev(i).real());
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  }
};

template <std::size_t N>
Vec<N> axpy(const Vec<N>& y, double h, std::initializer_list<std::pair<double, const Vec<N>*>> terms) {
  Vec<N> out = y;
  for (const auto& [c, k] : terms) {
    if (c == 0.0) continue;
    for (std::size_t i = 0; i < N; ++i) out[i] += h * c * (*k)[i];
  }
  return out;
}

struct RunResult {
  std::vector<double> times;
  std::vector<double> grid_states;  // n_grid * N
  std::shared_ptr<DenseTrajectory> dense;
  std::size_t accepted = 0, rejected = 0;
};

template <std::size_t N>
RunResult run_dopri5(const System<N>& f, Vec<N> y, double t_end, const OdeOptions& opts) {
  if (!(t_end > 0.0)) throw std::invalid_argument("integrate: t_end must be > 0");
  if (!(opts.tol >= 1e-14 && opts.tol <= 1e-3)) {
    throw std::invalid_argument("integrate: tol must lie in [1e-14, 1e-3]");
  }
  if (opts.n_grid < 2) throw std::invalid_argument("integrate: n_grid must be >= 2");

  RunResult res;
  res.dense = std::make_shared<DenseTrajectory>(N);
  res.times.resize(opts.n_grid);
  for (std::size_t i = 0; i < opts.n_grid; ++i) {
    res.times[i] = t_end * static_cast<double>(i) / static_cast<double>(opts.n_grid - 1);
  }
  res.times.back() = t_end;
  res.grid_states.assign(opts.n_grid * N, 0.0);
  std::copy(y.begin(), y.end(), res.grid_states.begin());
  std::size_t next_grid = 1;

  const double tol = opts.tol;
  const double min_step = opts.min_step > 0.0 ? opts.min_step : 1e-14 * t_end;
  double t = 0.0;
  // crude initial step: a small fraction of the fastest time scale
  double rate = 0.0;
  for (std::size_t i = 0; i + 1 < N; ++i)
    for (std::size_t j = 0; j + 1 < N; ++j) rate = std::max(rate, std::abs(f.A[i][j]));
  double h = rate > 0.0 ? std::min(t_end, 0.01 / rate) : t_end;
  h = std::max(h, min_step);

  Vec<N> k1 = f(y);
  std::array<double, 5 * N> rc{};
  std::size_t steps = 0;
  while (t < t_end) {
    if (++steps > opts.max_steps) {
      throw IntegrationError("integrate: exceeded max_steps at t=" + std::to_string(t));
    }
    bool last = false;
    if (t + h >= t_end) {
      h = t_end - t;
      last = true;
    }
    const Vec<N> k2 = f(axpy<N>(y, h, {{a21, &k1}}));
    const Vec<N> k3 = f(axpy<N>(y, h, {{a31, &k1}, {a32, &k2}}));
    const Vec<N> k4 = f(axpy<N>(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const Vec<N> k5 = f(axpy<N>(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const Vec<N> k6 = f(axpy<N>(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const Vec<N> y1 = axpy<N>(y, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
    const Vec<N> k7 = f(y1);

    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sk = tol + tol * std::max(std::abs(y[i]), std::abs(y1[i]));
      err += (ei / sk) * (ei / sk);
    }
    err = std::sqrt(err / N);

    if (err <= 1.0) {
      for (std::size_t i = 0; i < N; ++i) {
        const double ydiff = y1[i] - y[i];
        const double bspl = h * k1[i] - ydiff;
        rc[i] = y[i];
        rc[N + i] = ydiff;
        rc[2 * N + i] = bspl;
        rc[3 * N + i] = ydiff - h * k7[i] - bspl;
        rc[4 * N + i] =
            h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      res.dense->append(t, h, rc.data());
      const double t_new = last ? t_end : t + h;
      while (next_grid < opts.n_grid && res.times[next_grid] <= t_new) {
        res.dense->evaluate(res.times[next_grid], &res.grid_states[next_grid * N]);
        ++next_grid;
      }
      t = t_new;
      y = y1;
      k1 = k7;
      ++res.accepted;
      const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 10.0;
      h *= std::clamp(fac, 0.2, 10.0);
    } else {
      ++res.rejected;
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
      if (h < min_step) {
        std::ostringstream msg;
        msg << "integrate: step size underflow (h=" << h << " < " << min_step << ") at t=" << t
            << "; stiffness ratio of the amplitude system = " << f.stiffness_ratio();
        throw IntegrationError(msg.str());
      }
    }
  }
  // grid points lost to rounding at the very end
  while (next_grid < opts.n_grid) {
    std::copy(y.begin(), y.end(), res.grid_states.begin() + static_cast<std::ptrdiff_t>(next_grid * N));
    ++next_grid;
  }
  return res;
}

System<3> single_system(const PhysicalParams& p) {
  const double h = 0.5 * p.omega0;
  const double cg = p.collective_rate();
  System<3> s;
  s.A = {{{0.0, h}, {-h, -0.5 * cg}}};
  s.emit = {0.0, cg};
  return s;
}

System<4> pair_system(const PhysicalParams& p) {
  const double r = p.omega0 / std::numbers::sqrt2;
  const double cg = p.collective_rate();
  System<4> s;
  s.A = {{{0.0, r, 0.0}, {-r, -0.5 * cg, r}, {0.0, -r, -cg}}};
  s.emit = {0.0, cg, 2.0 * cg};
  return s;
}

}  // namespace

void DenseTrajectory::append(double t0, double h, const double* rcont) {
  t0_.push_back(t0);
  h_.push_back(h);
  rcont_.insert(rcont_.end(), rcont, rcont + 5 * dim_);
}

void DenseTrajectory::evaluate(double t, double* out) const {
  if (t0_.empty()) throw std::logic_error("DenseTrajectory::evaluate on empty trajectory");
  if (t < t_begin() || t > t_end()) {
    throw std::out_of_range("DenseTrajectory::evaluate: t outside integrated range");
  }
  auto it = std::upper_bound(t0_.begin(), t0_.end(), t);
  const std::size_t s = it == t0_.begin() ? 0 : static_cast<std::size_t>(it - t0_.begin()) - 1;
  const double theta = h_[s] > 0.0 ? (t - t0_[s]) / h_[s] : 0.0;
  const double theta1 = 1.0 - theta;
  const double* r = &rcont_[s * 5 * dim_];
  for (std::size_t i = 0; i < dim_; ++i) {
    out[i] = r[i] + theta * (r[dim_ + i] +
                             theta1 * (r[2 * dim_ + i] + theta * (r[3 * dim_ + i] + theta1 * r[4 * dim_ + i])));
  }
}

AmplitudeState1 OdeSolution::single_at(double t) const {
  if (system != AmplitudeSystem::single) throw std::logic_error("single_at on a pair solution");
  double y[3];
  dense->evaluate(t, y);
  return {y[0], y[1]};
}

AmplitudeState2 OdeSolution::pair_at(double t) const {
  if (system != AmplitudeSystem::pair) throw std::logic_error("pair_at on a single solution");
  double y[4];
  dense->evaluate(t, y);
  return {y[0], y[1], y[2]};
}

double OdeSolution::emitted_at(double t) const {
  double y[4];
  dense->evaluate(t, y);
  return y[dense->dim() - 1];
}

double OdeSolution::norm_sq(std::size_t i) const {
  return system == AmplitudeSystem::single ? single.at(i).norm_sq() : pair.at(i).norm_sq();
}

OdeSolution integrate_single(const PhysicalParams& p, double t_end, const OdeOptions& opts,
                             AmplitudeState1 init) {
  validate(p);
  RunResult r = run_dopri5<3>(single_system(p), {init.alpha, init.beta, 0.0}, t_end, opts);
  OdeSolution sol;
  sol.system = AmplitudeSystem::single;
  sol.params = p;
  sol.times = std::move(r.times);
  sol.single.resize(sol.times.size());
  sol.emitted_prob.resize(sol.times.size());
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    sol.single[i] = {r.grid_states[3 * i], r.grid_states[3 * i + 1]};
    sol.emitted_prob[i] = r.grid_states[3 * i + 2];
  }
  sol.dense = std::move(r.dense);
  sol.n_accepted = r.accepted;
  sol.n_rejected = r.rejected;
  return sol;
}

OdeSolution integrate_double(const PhysicalParams& p, double t_end, const OdeOptions& opts) {
  validate(p);
  RunResult r = run_dopri5<4>(pair_system(p), {1.0, 0.0, 0.0, 0.0}, t_end, opts);
  OdeSolution sol;
  sol.system = AmplitudeSystem::pair;
  sol.params = p;
  sol.times = std::move(r.times);
  sol.pair.resize(sol.times.size());
  sol.emitted_prob.resize(sol.times.size());
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    sol.pair[i] = {r.grid_states[4 * i], r.grid_states[4 * i + 1], r.grid_states[4 * i + 2]};
    sol.emitted_prob[i] = r.grid_states[4 * i + 3];
  }
  sol.dense = std::move(r.dense);
  sol.n_accepted = r.accepted;
  sol.n_rejected = r.rejected;
  return sol;
}

std::vector<double> emission_density(const OdeSolution& sol) {
  const double cg = sol.params.collective_rate();
  std::vector<double> out(sol.times.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (sol.system == AmplitudeSystem::single) {
      const double b = sol.single[i].beta;
      out[i] = cg * b * b;
    } else {
      const AmplitudeState2& s = sol.pair[i];
      out[i] = cg * (s.mu * s.mu + 2.0 * s.nu * s.nu);
    }
  }
  return out;
}

}  // namespace srmem
