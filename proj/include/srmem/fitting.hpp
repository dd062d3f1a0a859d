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

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "srmem/core_model.hpp"
#include "srmem/params.hpp"
#include "srmem/trajectories.hpp"

// Weighted least-squares recovery of (chi, omega0) and nuisance parameters
// from binned detection-time data.

namespace srmem {

/// Raised when the normal equations are singular; the message names the two
/// parameters that cannot be told apart.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FitParam { chi, omega0, amplitude_scale, background, t_offset };
inline constexpr std::size_t kNumFitParams = 5;

const char* to_string(FitParam p);
std::optional<FitParam> parse_fit_param(std::string_view name);

/// Values of every model parameter, SI at the boundary: omega0 in rad/s,
/// background in counts per second, t_offset in seconds. amplitude_scale is
/// the expected total number of counts from the wavepacket.
struct FitValues {
  double chi = 1.0;
  double omega0 = 0.0;
  double amplitude_scale = 1.0;
  double background = 0.0;
  double t_offset = 0.0;

  double& operator[](FitParam p);
  double operator[](FitParam p) const;
};

struct FitModel {
  DensityKind kind = DensityKind::single;
  std::vector<FitParam> free{FitParam::chi, FitParam::omega0, FitParam::amplitude_scale};
  double gamma = 0.0;  // fixed single-atom decay rate, rad/s
};

/// Counts per bin; counts may be non-integer (e.g. noiseless expectations).
struct BinnedData {
  std::vector<double> bin_edges;
  std::vector<double> counts;

  std::size_t n_bins() const { return counts.size(); }
  double total() const;

  static BinnedData from_histogram(const Histogram& h);
  /// Bins of equal width centered on `centers` (uniformly spaced).
  static BinnedData from_centers(std::span<const double> centers, std::span<const double> counts);
};

/// Throws ParameterError for fewer than one bin, mismatched sizes, non-increasing
/// edges or negative / non-finite counts.
void validate(const BinnedData& d);

struct FitOptions {
  std::size_t max_iter = 200;
  double gtol = 1e-7;       // largest |cos| between residual and a Jacobian column
  double xtol = 1e-12;      // relative step below which the search stops
  double lambda0 = 1e-3;    // initial damping
  double rel_step = 1e-6;   // central-difference step, relative to the parameter scale
  bool gamma_units = true;  // run in units of 1/gamma internally
};

struct FitResult {
  FitModel model;
  FitValues estimates;
  Eigen::MatrixXd covariance;  // over model.free, same order, SI units
  double chi2 = 0.0;
  double chi2_reduced = 0.0;
  double gradient_cosine = 0.0;
  std::size_t n_iter = 0;
  std::size_t n_used_bins = 0;
  bool converged = false;
  std::vector<double> expected;  // model counts per bin at the estimates (all bins)

  /// sqrt of the covariance diagonal; 0 for fixed parameters.
  double standard_error(FitParam p) const;
};

/// Expected counts per bin: integral over the bin of
///   amplitude_scale * rho(t - t_offset) + background,
/// by 3-point Gauss-Legendre quadrature.
std::vector<double> expected_counts(const FitModel& model, const FitValues& v, std::span<const double> bin_edges);

/// Minimizes sum_b (counts_b - model_b)^2 / max(counts_b, 1) over the free
/// parameters by damped Gauss-Newton, parameters projected onto chi >= 1,
/// omega0 > 0, amplitude_scale > 0, background >= 0. `init` supplies starting
/// values for free parameters and the values of fixed ones.
FitResult fit(const BinnedData& data, const FitModel& model, const FitValues& init, const FitOptions& opts = {});

/// As fit() with the listed bins left out of the objective.
FitResult masked_fit(const BinnedData& data, const FitModel& model, const FitValues& init,
                     std::span<const std::size_t> mask, const FitOptions& opts = {});

/// Indices of bins whose centers fall in any [lo, hi] range.
std::vector<std::size_t> mask_from_ranges(const BinnedData& data, std::span<const std::pair<double, double>> ranges);

struct EnvelopeReport {
  bool insufficient = true;
  std::size_t n_maxima = 0;
  std::vector<double> peak_times;   // s
  std::vector<double> peak_counts;  // background-subtracted, summed over the peak window
  double measured_rate = 0.0;       // 1/s, decay rate of the peak envelope
  double predicted_rate = 0.0;      // chi gamma / 2 (single, second_marginal) or chi gamma (first)
  double ratio = 0.0;               // measured / predicted
};

/// Finds the oscillation maxima of the data near the maxima of the fitted
/// model, keeps those that stand out from the neighbouring minima by more
/// than three Poisson standard deviations, and fits a single exponential to
/// them. Fewer than three such maxima flags the report insufficient.
EnvelopeReport envelope_check(const FitResult& result, const BinnedData& data);

/// Probability that the detection falls in each bin, from exact survival
/// functions (single, first) or fine quadrature (second_marginal).
std::vector<double> bin_probabilities(const PhysicalParams& p, DensityKind kind, std::span<const double> bin_edges,
                                      double t_offset = 0.0);

struct SynthSpec {
  DensityKind kind = DensityKind::single;
  PhysicalParams params;          // SI
  std::vector<double> bin_edges;  // s
  double total_counts = 1e5;      // expected counts from the wavepacket
  double background = 0.0;        // counts per second
  double t_offset = 0.0;          // s
  bool poisson = true;            // false returns the expectations
  std::uint64_t seed = 1;
};

BinnedData synthesize_histogram(const SynthSpec& spec);

}  // namespace srmem
