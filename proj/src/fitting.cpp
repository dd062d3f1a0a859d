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

#include "srmem/fitting.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace srmem {
namespace {

constexpr std::array<FitParam, kNumFitParams> kAllParams = {FitParam::chi, FitParam::omega0, FitParam::amplitude_scale,
                                                           FitParam::background, FitParam::t_offset};

void require(bool ok, const std::string& msg) {
  if (!ok) throw ParameterError(msg);
}

double lower_bound(FitParam p) {
  switch (p) {
    case FitParam::chi: return 1.0;
    case FitParam::omega0: return std::numeric_limits<double>::min();
    case FitParam::amplitude_scale: return std::numeric_limits<double>::min();
    case FitParam::background: return 0.0;
    case FitParam::t_offset: return -std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

// Time unit u: internal times are t * u, rates are r / u.
FitValues scale_values(const FitValues& v, double u) {
  return {v.chi, v.omega0 / u, v.amplitude_scale, v.background / u, v.t_offset * u};
}

// d(SI value)/d(internal value)
double si_factor(FitParam p, double u) {
  switch (p) {
    case FitParam::omega0:
    case FitParam::background: return u;
    case FitParam::t_offset: return 1.0 / u;
    default: return 1.0;
  }
}

struct Problem {
  FitModel model;  // gamma in internal units
  std::vector<double> edges;
  std::vector<std::size_t> used;
  std::vector<double> counts;   // used bins only
  std::vector<double> sqrt_w;   // used bins only
  FitValues base;               // internal values, fixed parameters taken from here
  std::vector<double> typical;  // per free parameter, for difference steps

  FitValues values(const Eigen::VectorXd& x) const {
    FitValues v = base;
    for (std::size_t j = 0; j < model.free.size(); ++j) v[model.free[j]] = x(static_cast<Eigen::Index>(j));
    return v;
  }

  // sqrt(w) * expected counts on the used bins
  Eigen::VectorXd weighted_model(const Eigen::VectorXd& x) const {
    const std::vector<double> e = expected_counts(model, values(x), edges);
    Eigen::VectorXd m(static_cast<Eigen::Index>(used.size()));
    for (std::size_t i = 0; i < used.size(); ++i) m(static_cast<Eigen::Index>(i)) = sqrt_w[i] * e[used[i]];
    return m;
  }

  Eigen::VectorXd residual(const Eigen::VectorXd& x) const {
    Eigen::VectorXd r = weighted_model(x);
    for (std::size_t i = 0; i < used.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      r(k) = sqrt_w[i] * counts[i] - r(k);
    }
    return r;
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x, double rel_step) const {
    const auto n = static_cast<Eigen::Index>(used.size());
    const auto k = static_cast<Eigen::Index>(model.free.size());
    Eigen::MatrixXd J(n, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      const FitParam p = model.free[static_cast<std::size_t>(j)];
      const double h = rel_step * std::max(std::abs(x(j)), typical[static_cast<std::size_t>(j)]);
      Eigen::VectorXd hi = x, lo = x;
      hi(j) += h;
      lo(j) -= h;
      if (lo(j) < lower_bound(p)) {
        J.col(j) = (weighted_model(hi) - weighted_model(x)) / h;
      } else {
        J.col(j) = (weighted_model(hi) - weighted_model(lo)) / (2.0 * h);
      }
    }
    return J;
  }

  void project(Eigen::VectorXd& x) const {
    for (std::size_t j = 0; j < model.free.size(); ++j) {
      const auto i = static_cast<Eigen::Index>(j);
      x(i) = std::max(x(i), lower_bound(model.free[j]));
    }
  }
};

// Throws FitError when the (scaled) normal matrix is numerically singular.
void check_singular(const Eigen::MatrixXd& A, const std::vector<FitParam>& free) {
  const Eigen::Index k = A.rows();
  Eigen::VectorXd d(k);
  for (Eigen::Index j = 0; j < k; ++j) d(j) = A(j, j) > 0.0 ? 1.0 / std::sqrt(A(j, j)) : 1.0;
  const Eigen::MatrixXd C = d.asDiagonal() * A * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  const double lo = es.eigenvalues()(0);
  const double hi = std::max(es.eigenvalues()(k - 1), 1.0);
  if (lo > 1e-12 * hi) return;
  std::string msg = "singular normal equations: ";
  if (k == 1) {
    msg += "parameter " + std::string(to_string(free[0])) + " does not affect the model";
    throw FitError(msg);
  }
  const Eigen::VectorXd v = es.eigenvectors().col(0).cwiseAbs();
  Eigen::Index a = 0;
  v.maxCoeff(&a);
  Eigen::Index b = a == 0 ? 1 : 0;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (j != a && v(j) > v(b)) b = j;
  }
  const auto ia = std::min(a, b), ib = std::max(a, b);
  msg += "parameters " + std::string(to_string(free[static_cast<std::size_t>(ia)])) + " and " +
         to_string(free[static_cast<std::size_t>(ib)]) + " are degenerate";
  throw FitError(msg);
}

// Largest |cos| between the residual and a Jacobian column, ignoring
// parameters held at a bound by the gradient.
double gradient_cosine(const Eigen::MatrixXd& J, const Eigen::VectorXd& r, const Eigen::VectorXd& x,
                       const std::vector<FitParam>& free) {
  const Eigen::VectorXd g = J.transpose() * r;
  const double rn = r.norm();
  if (rn == 0.0) return 0.0;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    const bool at_bound = x(j) <= lower_bound(free[static_cast<std::size_t>(j)]) && g(j) < 0.0;
    const double cn = J.col(j).norm();
    if (at_bound || cn == 0.0) continue;
    worst = std::max(worst, std::abs(g(j)) / (cn * rn));
  }
  return worst;
}

FitResult run_fit(const BinnedData& data, const FitModel& model, const FitValues& init,
                  std::span<const std::size_t> mask, const FitOptions& opts) {
  validate(data);
  require(std::isfinite(model.gamma) && model.gamma > 0.0, "FitModel.gamma must be > 0");
  require(!model.free.empty(), "FitModel.free must not be empty");
  for (std::size_t i = 0; i < model.free.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      require(model.free[i] != model.free[j],
              std::string("FitModel.free lists ") + to_string(model.free[i]) + " twice");
    }
  }
  for (const FitParam p : kAllParams) {
    require(std::isfinite(init[p]), std::string("initial ") + to_string(p) + " is not finite");
  }
  require(init.chi >= 1.0, "initial chi must be >= 1");
  require(init.omega0 > 0.0, "initial omega0 must be > 0");
  require(init.amplitude_scale > 0.0, "initial amplitude_scale must be > 0");
  require(init.background >= 0.0, "initial background must be >= 0");
  require(opts.max_iter >= 1, "FitOptions.max_iter must be >= 1");

  std::vector<bool> masked(data.n_bins(), false);
  for (const std::size_t i : mask) {
    require(i < data.n_bins(), "mask index " + std::to_string(i) + " is out of range");
    masked[i] = true;
  }

  const double u = opts.gamma_units ? model.gamma : 1.0;
  Problem pr;
  pr.model = model;
  pr.model.gamma = model.gamma / u;
  pr.edges.resize(data.bin_edges.size());
  for (std::size_t i = 0; i < data.bin_edges.size(); ++i) pr.edges[i] = data.bin_edges[i] * u;
  for (std::size_t i = 0; i < data.n_bins(); ++i) {
    if (masked[i]) continue;
    pr.used.push_back(i);
    pr.counts.push_back(data.counts[i]);
    pr.sqrt_w.push_back(1.0 / std::sqrt(std::max(data.counts[i], 1.0)));
  }
  const std::size_t n_free = model.free.size();
  require(pr.used.size() >= 2 * n_free,
          "need at least " + std::to_string(2 * n_free) + " unmasked bins for " + std::to_string(n_free) +
              " free parameters, have " + std::to_string(pr.used.size()));
  pr.base = scale_values(init, u);

  const double span = pr.edges.back() - pr.edges.front();
  const double bin_width = span / static_cast<double>(data.n_bins());
  Eigen::VectorXd x(static_cast<Eigen::Index>(n_free));
  for (std::size_t j = 0; j < n_free; ++j) {
    const FitParam p = model.free[j];
    x(static_cast<Eigen::Index>(j)) = pr.base[p];
    double typ = 1.0;
    if (p == FitParam::background) typ = 1e-3 * std::max(data.total(), 1.0) / span;
    if (p == FitParam::t_offset) typ = bin_width;
    pr.typical.push_back(typ);
  }

  Eigen::VectorXd r = pr.residual(x);
  double cost = r.squaredNorm();
  double lambda = opts.lambda0;
  double cosine = 1.0;
  std::size_t iter = 0;
  bool converged = false;
  Eigen::MatrixXd J = pr.jacobian(x, opts.rel_step);
  check_singular(J.transpose() * J, model.free);

  while (iter < opts.max_iter) {
    ++iter;
    Eigen::MatrixXd A = J.transpose() * J;
    Eigen::VectorXd g = J.transpose() * r;
    cosine = gradient_cosine(J, r, x, model.free);
    // parameters pinned at a bound and pushed outward stay put this iteration
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      if (x(j) <= lower_bound(model.free[static_cast<std::size_t>(j)]) && g(j) < 0.0) {
        A.row(j).setZero();
        A.col(j).setZero();
        A(j, j) = 1.0;
        g(j) = 0.0;
      }
    }
    if (cosine < opts.gtol) {
      converged = true;
      break;
    }
    bool accepted = false;
    bool stalled = false;
    bool negligible = false;
    while (!accepted) {
      Eigen::MatrixXd M = A;
      for (Eigen::Index j = 0; j < M.rows(); ++j) M(j, j) += lambda * std::max(A(j, j), 1e-300);
      Eigen::VectorXd x_new = x + M.ldlt().solve(g);
      pr.project(x_new);
      const Eigen::VectorXd step = x_new - x;
      double rel = 0.0;
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        rel = std::max(rel, std::abs(step(j)) / std::max(std::abs(x(j)), pr.typical[static_cast<std::size_t>(j)]));
      }
      if (!(rel > opts.xtol)) {
        stalled = true;
        // damping alone can shrink the step; require the Gauss-Newton step to vanish too
        const Eigen::VectorXd gn = A.ldlt().solve(g);
        double rel_gn = 0.0;
        for (Eigen::Index j = 0; j < x.size(); ++j) {
          rel_gn = std::max(rel_gn, std::abs(gn(j)) / std::max(std::abs(x(j)), pr.typical[static_cast<std::size_t>(j)]));
        }
        negligible = rel_gn < 1e3 * opts.xtol;
        break;
      }
      const Eigen::VectorXd r_new = pr.residual(x_new);
      const double cost_new = r_new.squaredNorm();
      if (std::isfinite(cost_new) && cost_new < cost) {
        x = x_new;
        r = r_new;
        cost = cost_new;
        lambda = std::max(lambda / 10.0, 1e-15);
        accepted = true;
      } else {
        lambda *= 10.0;
        if (lambda > 1e20) {
          stalled = true;
          break;
        }
      }
    }
    J = pr.jacobian(x, opts.rel_step);
    if (stalled) {
      cosine = gradient_cosine(J, r, x, model.free);
      // at the roundoff floor the cosine is noise; a vanishing step still marks the minimum
      converged = negligible || cosine < opts.gtol;
      break;
    }
  }
  if (!converged && iter >= opts.max_iter) cosine = gradient_cosine(J, r, x, model.free);

  const Eigen::MatrixXd A = J.transpose() * J;
  check_singular(A, model.free);
  const Eigen::MatrixXd cov_internal = A.inverse();

  FitResult res;
  res.model = model;
  const FitValues vi = pr.values(x);
  res.estimates = scale_values(vi, 1.0 / u);
  for (const FitParam p : kAllParams) {
    if (std::find(model.free.begin(), model.free.end(), p) == model.free.end()) res.estimates[p] = init[p];
  }
  Eigen::VectorXd f(static_cast<Eigen::Index>(n_free));
  for (std::size_t j = 0; j < n_free; ++j) f(static_cast<Eigen::Index>(j)) = si_factor(model.free[j], u);
  res.covariance = f.asDiagonal() * cov_internal * f.asDiagonal();
  res.covariance = 0.5 * (res.covariance + res.covariance.transpose()).eval();
  res.chi2 = cost;
  res.n_used_bins = pr.used.size();
  res.chi2_reduced = cost / static_cast<double>(pr.used.size() - n_free);
  res.gradient_cosine = cosine;
  res.n_iter = iter;
  res.converged = converged;
  res.expected = expected_counts(model, res.estimates, data.bin_edges);
  return res;
}

struct Extremum {
  double time = 0.0;
  double value = 0.0;  // summed counts over the window, background removed
  double raw = 0.0;    // summed counts over the window
};

}  // namespace

const char* to_string(FitParam p) {
  switch (p) {
    case FitParam::chi: return "chi";
    case FitParam::omega0: return "omega0";
    case FitParam::amplitude_scale: return "amplitude_scale";
    case FitParam::background: return "background";
    case FitParam::t_offset: return "t_offset";
  }
  return "?";
}

std::optional<FitParam> parse_fit_param(std::string_view name) {
  for (const FitParam p : kAllParams) {
    if (name == to_string(p)) return p;
  }
  return std::nullopt;
}

double& FitValues::operator[](FitParam p) {
  switch (p) {
    case FitParam::chi: return chi;
    case FitParam::omega0: return omega0;
    case FitParam::amplitude_scale: return amplitude_scale;
    case FitParam::background: return background;
    case FitParam::t_offset: return t_offset;
  }
  return chi;
}

double FitValues::operator[](FitParam p) const { return const_cast<FitValues&>(*this)[p]; }

double BinnedData::total() const {
  double s = 0.0;
  for (const double c : counts) s += c;
  return s;
}

BinnedData BinnedData::from_histogram(const Histogram& h) {
  BinnedData d;
  d.bin_edges = h.bin_edges;
  d.counts.assign(h.counts.begin(), h.counts.end());
  return d;
}

BinnedData BinnedData::from_centers(std::span<const double> centers, std::span<const double> counts) {
  require(centers.size() == counts.size(), "bin centers and counts differ in length");
  require(centers.size() >= 2, "need at least two bins to infer the bin width");
  const std::size_t n = centers.size();
  const double w = (centers[n - 1] - centers[0]) / static_cast<double>(n - 1);
  require(w > 0.0, "bin centers must be increasing");
  for (std::size_t i = 1; i < n; ++i) {
    require(std::abs(centers[i] - centers[i - 1] - w) <= 1e-6 * w,
            "bin centers must be uniformly spaced (row " + std::to_string(i + 1) + ")");
  }
  BinnedData d;
  d.bin_edges.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) d.bin_edges[i] = centers[0] + (static_cast<double>(i) - 0.5) * w;
  d.counts.assign(counts.begin(), counts.end());
  return d;
}

void validate(const BinnedData& d) {
  require(d.n_bins() >= 1, "histogram has no bins");
  require(d.bin_edges.size() == d.n_bins() + 1, "histogram needs n_bins + 1 edges");
  for (std::size_t i = 0; i < d.bin_edges.size(); ++i) {
    require(std::isfinite(d.bin_edges[i]), "bin edge " + std::to_string(i) + " is not finite");
    if (i > 0) require(d.bin_edges[i] > d.bin_edges[i - 1], "bin edges must be strictly increasing");
  }
  for (std::size_t i = 0; i < d.n_bins(); ++i) {
    require(std::isfinite(d.counts[i]) && d.counts[i] >= 0.0,
            "count in bin " + std::to_string(i) + " must be finite and >= 0");
  }
}

double FitResult::standard_error(FitParam p) const {
  for (std::size_t j = 0; j < model.free.size(); ++j) {
    if (model.free[j] == p) {
      const auto i = static_cast<Eigen::Index>(j);
      return std::sqrt(std::max(covariance(i, i), 0.0));
    }
  }
  return 0.0;
}

std::vector<double> expected_counts(const FitModel& model, const FitValues& v, std::span<const double> bin_edges) {
  require(bin_edges.size() >= 2, "expected_counts: need at least two edges");
  static constexpr double kNode = 0.7745966692414834;  // sqrt(3/5)
  static constexpr std::array<double, 3> kX = {-kNode, 0.0, kNode};
  static constexpr std::array<double, 3> kW = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const std::size_t n = bin_edges.size() - 1;
  // the signal part of a bin starts at the offset, so the rule never straddles the onset
  std::vector<double> t(3 * n), rho(3 * n), sig_half(n);
  for (std::size_t b = 0; b < n; ++b) {
    const double lo = std::clamp(bin_edges[b], v.t_offset, std::max(bin_edges[b + 1], v.t_offset));
    const double mid = 0.5 * (lo + bin_edges[b + 1]) - v.t_offset;
    sig_half[b] = 0.5 * std::max(bin_edges[b + 1] - lo, 0.0);
    for (std::size_t q = 0; q < 3; ++q) t[3 * b + q] = mid + sig_half[b] * kX[q];
  }
  const PhysicalParams p{v.omega0, model.gamma, v.chi};
  evaluate_density(p, model.kind, t, rho);
  std::vector<double> out(n);
  for (std::size_t b = 0; b < n; ++b) {
    double s = 0.0;
    for (std::size_t q = 0; q < 3; ++q) s += kW[q] * rho[3 * b + q];
    out[b] = v.amplitude_scale * sig_half[b] * s + v.background * (bin_edges[b + 1] - bin_edges[b]);
  }
  return out;
}

FitResult fit(const BinnedData& data, const FitModel& model, const FitValues& init, const FitOptions& opts) {
  return run_fit(data, model, init, {}, opts);
}

FitResult masked_fit(const BinnedData& data, const FitModel& model, const FitValues& init,
                     std::span<const std::size_t> mask, const FitOptions& opts) {
  return run_fit(data, model, init, mask, opts);
}

std::vector<std::size_t> mask_from_ranges(const BinnedData& data, std::span<const std::pair<double, double>> ranges) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < data.n_bins(); ++i) {
    const double c = 0.5 * (data.bin_edges[i] + data.bin_edges[i + 1]);
    for (const auto& [lo, hi] : ranges) {
      if (c >= lo && c <= hi) {
        idx.push_back(i);
        break;
      }
    }
  }
  return idx;
}

EnvelopeReport envelope_check(const FitResult& result, const BinnedData& data) {
  validate(data);
  EnvelopeReport rep;
  const FitValues& v = result.estimates;
  const double cg = v.chi * result.model.gamma;
  rep.predicted_rate = result.model.kind == DensityKind::first ? cg : 0.5 * cg;
  const double omega_sq = v.omega0 * v.omega0 - 0.25 * cg * cg;
  if (!(omega_sq > 0.0)) return rep;
  const double period = 2.0 * std::numbers::pi / std::sqrt(omega_sq);

  const std::size_t n = data.n_bins();
  if (n < 3) return rep;
  const std::vector<double> model = expected_counts(result.model, v, data.bin_edges);
  std::vector<double> centers(n), widths(n);
  for (std::size_t i = 0; i < n; ++i) {
    centers[i] = 0.5 * (data.bin_edges[i] + data.bin_edges[i + 1]);
    widths[i] = data.bin_edges[i + 1] - data.bin_edges[i];
  }
  const double mean_width = (data.bin_edges.back() - data.bin_edges.front()) / static_cast<double>(n);
  const auto half_agg = static_cast<std::size_t>(std::floor(period / (8.0 * mean_width)));

  // summed counts over [i - half_agg, i + half_agg]
  const auto window = [&](std::size_t i) {
    const std::size_t lo = i >= half_agg ? i - half_agg : 0;
    const std::size_t hi = std::min(n - 1, i + half_agg);
    Extremum e;
    double width = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) {
      e.raw += data.counts[j];
      width += widths[j];
    }
    e.time = centers[i];
    e.value = e.raw - v.background * width;
    return e;
  };
  // data extremum of the windowed sums within a quarter period of t_model
  const auto locate = [&](double t_model, bool maximum) {
    std::optional<Extremum> best;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(centers[i] - t_model) > 0.25 * period) continue;
      const Extremum e = window(i);
      if (!best || (maximum ? e.raw > best->raw : e.raw < best->raw)) best = e;
    }
    return best;
  };

  std::vector<std::size_t> model_max;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (model[i] > model[i - 1] && model[i] >= model[i + 1]) model_max.push_back(i);
  }
  std::vector<Extremum> peaks;
  for (std::size_t k = 0; k < model_max.size(); ++k) {
    const std::size_t m = model_max[k];
    const std::optional<Extremum> peak = locate(centers[m], true);
    if (!peak) break;
    // neighbouring model minima
    const std::size_t left_lo = k == 0 ? 0 : model_max[k - 1];
    const std::size_t right_hi = k + 1 < model_max.size() ? model_max[k + 1] : n - 1;
    double trough = -std::numeric_limits<double>::infinity();
    for (const auto& [a, b] : {std::pair{left_lo, m}, std::pair{m, right_hi}}) {
      if (b <= a + 1) continue;
      const auto it = std::min_element(model.begin() + static_cast<std::ptrdiff_t>(a + 1),
                                       model.begin() + static_cast<std::ptrdiff_t>(b));
      const auto j = static_cast<std::size_t>(it - model.begin());
      if (const std::optional<Extremum> t = locate(centers[j], false)) trough = std::max(trough, t->raw);
    }
    if (!std::isfinite(trough)) break;
    const double prominence = peak->raw - trough;
    if (!(prominence > 3.0 * std::sqrt(peak->raw + trough)) || !(peak->value > 0.0)) break;
    peaks.push_back(*peak);
  }
  rep.n_maxima = peaks.size();
  for (const Extremum& e : peaks) {
    rep.peak_times.push_back(e.time);
    rep.peak_counts.push_back(e.value);
  }
  if (peaks.size() < 3) return rep;

  // weighted fit of log(value) = c - rate * t, weights ~ value (Poisson)
  double sw = 0.0, st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (const Extremum& e : peaks) {
    const double w = e.value;
    const double y = std::log(e.value);
    sw += w;
    st += w * e.time;
    sy += w * y;
    stt += w * e.time * e.time;
    sty += w * e.time * y;
  }
  const double slope = (sw * sty - st * sy) / (sw * stt - st * st);
  rep.measured_rate = -slope;
  rep.ratio = rep.measured_rate / rep.predicted_rate;
  rep.insufficient = false;
  return rep;
}

std::vector<double> bin_probabilities(const PhysicalParams& p, DensityKind kind, std::span<const double> bin_edges,
                                      double t_offset) {
  validate(p);
  require(bin_edges.size() >= 2, "bin_probabilities: need at least two edges");
  for (std::size_t i = 1; i < bin_edges.size(); ++i) {
    require(bin_edges[i] > bin_edges[i - 1], "bin_probabilities: edges must be strictly increasing");
  }
  const std::size_t n = bin_edges.size() - 1;
  std::vector<double> out(n);
  if (kind != DensityKind::second_marginal) {
    const auto survival = [&](double t) {
      if (t <= 0.0) return 1.0;
      const double s = survival_norm(p, t);
      return kind == DensityKind::single ? s : s * s;
    };
    for (std::size_t b = 0; b < n; ++b) {
      out[b] = survival(bin_edges[b] - t_offset) - survival(bin_edges[b + 1] - t_offset);
    }
    return out;
  }
  // composite Gauss-Legendre on pieces short against 1/omega0 and 1/(chi gamma)
  using GL = boost::math::quadrature::gauss<double, 10>;
  const double h_max = 0.25 / std::max({p.omega0, p.collective_rate(), 1e-300});
  std::vector<double> nodes, weights;
  std::vector<std::size_t> owner;
  for (std::size_t b = 0; b < n; ++b) {
    const double lo = std::max(bin_edges[b] - t_offset, 0.0);
    const double hi = bin_edges[b + 1] - t_offset;
    if (!(hi > lo)) continue;
    const auto pieces = static_cast<std::size_t>(std::ceil((hi - lo) / h_max));
    const double h = (hi - lo) / static_cast<double>(pieces);
    for (std::size_t q = 0; q < pieces; ++q) {
      const double mid = lo + (static_cast<double>(q) + 0.5) * h;
      for (std::size_t i = 0; i < GL::abscissa().size(); ++i) {
        for (const double sgn : {-1.0, 1.0}) {
          if (GL::abscissa()[i] == 0.0 && sgn > 0.0) continue;
          nodes.push_back(mid + sgn * 0.5 * h * GL::abscissa()[i]);
          weights.push_back(0.5 * h * GL::weights()[i]);
          owner.push_back(b);
        }
      }
    }
  }
  std::vector<double> rho(nodes.size());
  evaluate_density(p, kind, nodes, rho);
  for (std::size_t i = 0; i < nodes.size(); ++i) out[owner[i]] += weights[i] * rho[i];
  return out;
}

BinnedData synthesize_histogram(const SynthSpec& spec) {
  require(std::isfinite(spec.total_counts) && spec.total_counts >= 0.0, "SynthSpec.total_counts must be >= 0");
  require(std::isfinite(spec.background) && spec.background >= 0.0, "SynthSpec.background must be >= 0");
  const std::vector<double> prob = bin_probabilities(spec.params, spec.kind, spec.bin_edges, spec.t_offset);
  BinnedData d;
  d.bin_edges = spec.bin_edges;
  d.counts.resize(prob.size());
  std::mt19937_64 engine(spec.seed);
  for (std::size_t b = 0; b < prob.size(); ++b) {
    const double mean = spec.total_counts * prob[b] + spec.background * (spec.bin_edges[b + 1] - spec.bin_edges[b]);
    if (!spec.poisson) {
      d.counts[b] = mean;
    } else if (mean > 0.0) {
      d.counts[b] = static_cast<double>(std::poisson_distribution<long long>(mean)(engine));
    }
  }
  return d;
}

}  // namespace srmem
