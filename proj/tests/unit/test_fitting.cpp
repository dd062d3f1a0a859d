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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "srmem/fitting.hpp"

using namespace srmem;

namespace {

const double kGamma = 2.0 * std::numbers::pi * 6.07e6;
const PhysicalParams kTruth{4e8, kGamma, 4.0};

std::vector<double> edges_ns(double width_ns, double span_ns) {
  return uniform_edges(0.0, span_ns * 1e-9, static_cast<std::size_t>(std::lround(span_ns / width_ns)));
}

BinnedData synth(DensityKind kind, double total, bool poisson, std::uint64_t seed, double width_ns = 1.0,
                 double background = 0.0) {
  SynthSpec s;
  s.kind = kind;
  s.params = kTruth;
  s.bin_edges = edges_ns(width_ns, 200.0);
  s.total_counts = total;
  s.background = background;
  s.poisson = poisson;
  s.seed = seed;
  return synthesize_histogram(s);
}

FitModel model_for(DensityKind kind) {
  FitModel m;
  m.kind = kind;
  m.gamma = kGamma;
  return m;
}

FitValues start(double total) {
  FitValues v;
  v.chi = 3.5;
  v.omega0 = 3.8e8;
  v.amplitude_scale = 0.9 * total;
  return v;
}

}  // namespace

TEST_CASE("parameter names") {
  for (std::size_t i = 0; i < kNumFitParams; ++i) {
    const auto p = static_cast<FitParam>(i);
    CHECK(parse_fit_param(to_string(p)) == p);
  }
  CHECK_FALSE(parse_fit_param("gamma").has_value());
  FitValues v;
  v[FitParam::background] = 3.0;
  CHECK(v.background == 3.0);
}

TEST_CASE("binned data") {
  const std::vector<double> c{1.0, 2.0, 3.0}, n{5.0, 0.0, 7.0};
  const BinnedData d = BinnedData::from_centers(c, n);
  CHECK(d.bin_edges == std::vector<double>{0.5, 1.5, 2.5, 3.5});
  CHECK(d.total() == 12.0);
  CHECK_THROWS_AS(BinnedData::from_centers(std::vector<double>{1.0, 2.0, 3.5}, n), ParameterError);
  CHECK_THROWS_AS(BinnedData::from_centers(c, std::vector<double>{1.0}), ParameterError);
  BinnedData bad = d;
  bad.counts[1] = -1.0;
  CHECK_THROWS_AS(validate(bad), ParameterError);
  Histogram h;
  h.bin_edges = {0.0, 1.0, 2.0};
  h.counts = {4, 6};
  CHECK(BinnedData::from_histogram(h).counts == std::vector<double>{4.0, 6.0});
}

TEST_CASE("bin probabilities") {
  const PhysicalParams p{10.0, 1.0, 4.0};
  const oracle::Rates r{10.0, 1.0, 4.0};
  const std::vector<double> edges = uniform_edges(0.0, 3.0, 30);
  const std::vector<double> ps = bin_probabilities(p, DensityKind::single, edges);
  const std::vector<double> pf = bin_probabilities(p, DensityKind::first, edges);
  const std::vector<double> pm = bin_probabilities(p, DensityKind::second_marginal, edges);
  for (std::size_t b = 0; b < 30; ++b) {
    const double lo = edges[b], hi = edges[b + 1];
    CHECK(ps[b] == doctest::Approx(oracle::integrate([&](double t) { return oracle::rho1(r, t); }, lo, hi))
                       .epsilon(1e-10).scale(1e-14));
    CHECK(pf[b] == doctest::Approx(oracle::integrate([&](double t) { return oracle::rho2_first(r, t); }, lo, hi))
                       .epsilon(1e-10).scale(1e-14));
    CHECK(pm[b] == doctest::Approx(oracle::integrate([&](double t) { return rho2_second_marginal(p, t); }, lo, hi))
                       .epsilon(1e-10).scale(1e-14));
  }
  // shifting the data and the offset together changes nothing
  std::vector<double> shifted = edges;
  for (double& e : shifted) e += 0.37;
  const std::vector<double> ps2 = bin_probabilities(p, DensityKind::single, shifted, 0.37);
  for (std::size_t b = 0; b < 30; ++b) CHECK(ps2[b] == doctest::Approx(ps[b]).epsilon(1e-12).scale(1e-15));
  // bins before the offset are empty
  const std::vector<double> early = bin_probabilities(p, DensityKind::second_marginal, edges, 1.0);
  CHECK(early[3] == 0.0);
}

TEST_CASE("model counts respect the time offset") {
  const FitModel m = model_for(DensityKind::single);
  FitValues v{4.0, 4e8, 1e5, 2e6, 0.0};
  const std::vector<double> e = edges_ns(1.0, 100.0);
  std::vector<double> shifted = e;
  for (double& x : shifted) x += 7e-9;
  const std::vector<double> a = expected_counts(m, v, e);
  v.t_offset = 7e-9;
  const std::vector<double> b = expected_counts(m, v, shifted);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-9));
  // background only before the offset
  const std::vector<double> c = expected_counts(m, v, e);
  CHECK(c[2] == doctest::Approx(2e6 * 1e-9));
}

TEST_CASE("noiseless data are recovered exactly") {
  for (const DensityKind kind : {DensityKind::single, DensityKind::first, DensityKind::second_marginal}) {
    CAPTURE(to_string(kind));
    const BinnedData d = synth(kind, 1e5, false, 1, 0.5);
    const FitResult r = fit(d, model_for(kind), start(1e5));
    CHECK(r.converged);
    CHECK(r.estimates.chi == doctest::Approx(kTruth.chi).epsilon(1e-6));
    CHECK(r.estimates.omega0 == doctest::Approx(kTruth.omega0).epsilon(1e-6));
    CHECK(r.estimates.amplitude_scale == doctest::Approx(1e5).epsilon(1e-6));
    CHECK(r.chi2 < 1e-6);
  }
}

TEST_CASE("Poisson data: estimates and uncertainties") {
  const BinnedData d = synth(DensityKind::single, 1e5, true, 7);
  const FitResult r = fit(d, model_for(DensityKind::single), start(d.total()));
  REQUIRE(r.converged);
  CHECK(r.n_used_bins == d.n_bins());
  CHECK(r.expected.size() == d.n_bins());
  const double se_chi = r.standard_error(FitParam::chi);
  const double se_om = r.standard_error(FitParam::omega0);
  CHECK(se_chi > 0.0);
  CHECK(r.standard_error(FitParam::background) == 0.0);
  CHECK(std::abs(r.estimates.chi - kTruth.chi) < 3.0 * se_chi);
  CHECK(std::abs(r.estimates.omega0 - kTruth.omega0) < 3.0 * se_om);
  CHECK(r.chi2_reduced == doctest::Approx(1.0).epsilon(0.3));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.covariance);
  CHECK(es.eigenvalues().minCoeff() > 0.0);

  // first-photon data of the same pair source give consistent parameters
  const BinnedData df = synth(DensityKind::first, 1e5, true, 8);
  const FitResult rf = fit(df, model_for(DensityKind::first), start(df.total()));
  REQUIRE(rf.converged);
  CHECK(std::abs(rf.estimates.chi - kTruth.chi) < 3.0 * rf.standard_error(FitParam::chi));
  CHECK(std::abs(rf.estimates.omega0 - kTruth.omega0) < 3.0 * rf.standard_error(FitParam::omega0));
}

TEST_CASE("all five parameters free") {
  // 1e3 background counts per bin keeps the low-count weighting bias well under the noise
  SynthSpec s;
  s.params = kTruth;
  s.bin_edges = uniform_edges(-20e-9, 200e-9, 220);
  s.total_counts = 1e7;
  s.background = 1e12;
  s.t_offset = 3.3e-9;
  FitModel m = model_for(DensityKind::single);
  m.free = {FitParam::chi, FitParam::omega0, FitParam::amplitude_scale, FitParam::background, FitParam::t_offset};
  const auto truth = [&](FitParam p) {
    return p == FitParam::chi          ? kTruth.chi
           : p == FitParam::omega0     ? kTruth.omega0
           : p == FitParam::background ? s.background
           : p == FitParam::t_offset   ? s.t_offset
                                       : s.total_counts;
  };
  FitValues init = start(s.total_counts);
  init.background = 5e11;
  init.t_offset = 2e-9;

  s.poisson = false;
  const FitResult exact = fit(synthesize_histogram(s), m, init);
  CHECK(exact.converged);
  for (const FitParam p : m.free) {
    CAPTURE(to_string(p));
    CHECK(exact.estimates[p] == doctest::Approx(truth(p)).epsilon(1e-6));
  }

  s.poisson = true;
  s.seed = 12;
  const FitResult r = fit(synthesize_histogram(s), m, init);
  REQUIRE(r.converged);
  for (const FitParam p : m.free) {
    CAPTURE(to_string(p));
    CHECK(std::abs(r.estimates[p] - truth(p)) < 4.0 * r.standard_error(p));
  }
}

TEST_CASE("a background pinned at zero does not stall the fit") {
  const BinnedData d = synth(DensityKind::single, 1e5, true, 2);
  FitModel m = model_for(DensityKind::single);
  m.free = {FitParam::chi, FitParam::omega0, FitParam::amplitude_scale, FitParam::background, FitParam::t_offset};
  const FitResult r = fit(d, m, start(d.total()));
  CHECK(r.converged);
  CHECK(r.n_iter < 50);
  CHECK(r.estimates.background >= 0.0);
  CHECK(std::abs(r.estimates.chi - kTruth.chi) < 4.0 * r.standard_error(FitParam::chi));
}

TEST_CASE("Gamma units and SI units give the same fit") {
  const BinnedData d = synth(DensityKind::single, 1e5, true, 3);
  FitOptions si;
  si.gamma_units = false;
  const FitResult a = fit(d, model_for(DensityKind::single), start(d.total()));
  const FitResult b = fit(d, model_for(DensityKind::single), start(d.total()), si);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  CHECK(b.estimates.chi == doctest::Approx(a.estimates.chi).epsilon(1e-5));
  CHECK(b.estimates.omega0 == doctest::Approx(a.estimates.omega0).epsilon(1e-5));
  CHECK(b.standard_error(FitParam::omega0) == doctest::Approx(a.standard_error(FitParam::omega0)).epsilon(1e-3));
}

TEST_CASE("masking") {
  const BinnedData d = synth(DensityKind::single, 1e5, true, 4);
  const FitModel m = model_for(DensityKind::single);
  const FitResult plain = fit(d, m, start(d.total()));
  const FitResult empty = masked_fit(d, m, start(d.total()), {});
  CHECK(empty.estimates.chi == plain.estimates.chi);

  // detector afterpulsing spike in three bins
  BinnedData spiked = d;
  for (std::size_t i = 40; i < 43; ++i) spiked.counts[i] += 3000.0;
  const std::vector<std::pair<double, double>> ranges{{39.9e-9, 43.1e-9}};
  const std::vector<std::size_t> mask = mask_from_ranges(spiked, ranges);
  CHECK(mask == std::vector<std::size_t>{40, 41, 42});
  const FitResult bad = fit(spiked, m, start(d.total()));
  const FitResult good = masked_fit(spiked, m, start(d.total()), mask);
  REQUIRE(good.converged);
  CHECK(good.n_used_bins == d.n_bins() - 3);
  CHECK(bad.chi2_reduced > 3.0);
  CHECK(good.chi2_reduced < 1.5);
  CHECK(std::abs(good.estimates.chi - kTruth.chi) < 3.0 * good.standard_error(FitParam::chi));

  std::vector<std::size_t> most;
  for (std::size_t i = 5; i < d.n_bins(); ++i) most.push_back(i);
  CHECK_THROWS_AS(masked_fit(d, m, start(d.total()), most), ParameterError);
  const std::vector<std::size_t> oob{d.n_bins()};
  CHECK_THROWS_AS(masked_fit(d, m, start(d.total()), oob), ParameterError);
}

TEST_CASE("invalid inputs") {
  const BinnedData d = synth(DensityKind::single, 1e4, true, 5);
  FitModel m = model_for(DensityKind::single);
  FitValues v = start(1e4);
  v.chi = 0.5;
  CHECK_THROWS_AS(fit(d, m, v), ParameterError);
  m.free = {FitParam::chi, FitParam::chi};
  CHECK_THROWS_AS(fit(d, m, start(1e4)), ParameterError);
  m.free.clear();
  CHECK_THROWS_AS(fit(d, m, start(1e4)), ParameterError);
  m = model_for(DensityKind::single);
  m.gamma = 0.0;
  CHECK_THROWS_AS(fit(d, m, start(1e4)), ParameterError);
}

TEST_CASE("degenerate parameters are named") {
  // every bin lies before the wavepacket starts
  BinnedData d;
  d.bin_edges = uniform_edges(0.0, 50e-9, 50);
  d.counts.assign(50, 10.0);
  FitModel m = model_for(DensityKind::single);
  m.free = {FitParam::chi, FitParam::omega0, FitParam::background};
  FitValues v = start(1e4);
  v.background = 1e10;
  v.t_offset = 100e-9;
  try {
    fit(d, m, v);
    FAIL("expected FitError");
  } catch (const FitError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("chi") != std::string::npos);
    CHECK(msg.find("omega0") != std::string::npos);
  }
}

TEST_CASE("iteration limit") {
  const BinnedData d = synth(DensityKind::single, 1e5, true, 6);
  FitOptions o;
  o.max_iter = 1;
  const FitResult r = fit(d, model_for(DensityKind::single), start(d.total()), o);
  CHECK_FALSE(r.converged);
  CHECK(r.n_iter == 1);
  CHECK(r.gradient_cosine > o.gtol);
}

TEST_CASE("envelope decay of the oscillation maxima") {
  const BinnedData ds = synth(DensityKind::single, 1e6, true, 9);
  const FitResult rs = fit(ds, model_for(DensityKind::single), start(ds.total()));
  const EnvelopeReport es = envelope_check(rs, ds);
  REQUIRE_FALSE(es.insufficient);
  CHECK(es.n_maxima >= 3);
  CHECK(es.peak_times.size() == es.n_maxima);
  CHECK(es.predicted_rate == doctest::Approx(0.5 * rs.estimates.chi * kGamma));
  CHECK(es.ratio == doctest::Approx(1.0).epsilon(0.1));

  const BinnedData df = synth(DensityKind::first, 1e6, true, 10);
  const FitResult rf = fit(df, model_for(DensityKind::first), start(df.total()));
  const EnvelopeReport ef = envelope_check(rf, df);
  REQUIRE_FALSE(ef.insufficient);
  CHECK(ef.ratio == doctest::Approx(1.0).epsilon(0.1));
  CHECK(ef.measured_rate / es.measured_rate == doctest::Approx(2.0).epsilon(0.1));

  // featureless data: no maximum stands out
  BinnedData flat = ds;
  std::fill(flat.counts.begin(), flat.counts.end(), 100.0);
  CHECK(envelope_check(rs, flat).insufficient);
}

TEST_CASE("replicate fits scatter as their reported uncertainties") {
  std::vector<double> chi, se;
  // weights floored at one count pull low-count tails down; the bias falls as 1/N and
  // drops below one standard error around 1e6 counts
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const BinnedData d = synth(DensityKind::single, 1e6, true, seed);
    const FitResult r = fit(d, model_for(DensityKind::single), start(d.total()));
    REQUIRE(r.converged);
    chi.push_back(r.estimates.chi);
    se.push_back(r.standard_error(FitParam::chi));
  }
  std::vector<double> sorted = chi;
  std::sort(sorted.begin(), sorted.end());
  const double median = 0.5 * (sorted[9] + sorted[10]);
  double mean = 0.0, var = 0.0, mean_se = 0.0;
  for (std::size_t i = 0; i < chi.size(); ++i) mean += chi[i] / chi.size(), mean_se += se[i] / se.size();
  for (const double c : chi) var += (c - mean) * (c - mean) / (chi.size() - 1);
  // one standard error of weighting bias plus three sigma of the median's own scatter
  CHECK(std::abs(median - kTruth.chi) < mean_se * (1.0 + 3.0 * 1.2533 / std::sqrt(20.0)));
  CHECK(std::sqrt(var) > 0.5 * mean_se);
  CHECK(std::sqrt(var) < 2.0 * mean_se);
}
