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

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <numbers>
#include <sstream>

#include "cli/config.hpp"
#include "cli/csv.hpp"
#include "srmem/cli.hpp"
#include "srmem/core_model.hpp"
#include "srmem/dynamics.hpp"
#include "srmem/fitting.hpp"
#include "srmem/params.hpp"
#include "srmem/superradiance.hpp"
#include "srmem/trajectories.hpp"

namespace srmem::cli {
namespace {

// Rb 87 D2 natural linewidth; an external constant, not a fitted value.
constexpr double kDefaultGamma = 2.0 * std::numbers::pi * 6.07e6;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return ss.str();
}

// Output goes to a file when a path is set, else to `fallback`.
void emit(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty() || path == "-") {
    fallback << text;
    if (!fallback) throw IoError("error writing to standard output");
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
  f.flush();
  if (!f) throw IoError("error writing '" + path + "'");
}

void echo_config(CsvWriter& w, const std::string& command, const Config& cfg) {
  w.comment("srmem " + command);
  for (const auto& [k, v] : cfg.entries()) w.comment(k + " = " + v);
}

PhysicalParams physical(const Config& cfg) {
  PhysicalParams p;
  p.omega0 = cfg.get_double("omega0_rad_s", std::nullopt);
  cfg.require(p.omega0 > 0.0, "omega0_rad_s", "must be > 0");
  p.gamma = cfg.get_double("gamma_rad_s", kDefaultGamma);
  cfg.require(p.gamma > 0.0, "gamma_rad_s", "must be > 0");
  p.chi = cfg.get_double("chi", std::nullopt);
  cfg.require(p.chi >= 1.0, "chi", "must be >= 1");
  return p;
}

DensityKind density_kind(const Config& cfg) {
  const std::string k = cfg.get_string("kind", "single");
  if (k == "single") return DensityKind::single;
  if (k == "first") return DensityKind::first;
  if (k == "second_marginal") return DensityKind::second_marginal;
  cfg.require(false, "kind", "must be single, first or second_marginal, got '" + k + "'");
  return DensityKind::single;
}

struct Range {
  double lo, hi;
};

Range time_range(const Config& cfg, double default_hi) {
  const Range r{cfg.get_double("t_lo_s", 0.0), cfg.get_double("t_hi_s", default_hi)};
  cfg.require(r.hi > r.lo, "t_hi_s", "must exceed t_lo_s");
  return r;
}

std::string report_line(const std::string& key, double v) { return key + "=" + format_number(v) + "\n"; }
std::string report_line(const std::string& key, const std::string& v) { return key + "=" + v + "\n"; }
std::string report_line(const std::string& key, bool v) { return key + "=" + (v ? "true" : "false") + "\n"; }
std::string report_line(const std::string& key, std::size_t v) { return key + "=" + std::to_string(v) + "\n"; }

int cmd_wavepacket(const Config& cfg, std::ostream& out) {
  const PhysicalParams p = physical(cfg);
  const Range r = time_range(cfg, 40.0 / p.collective_rate());
  const std::uint64_t n = cfg.get_uint("n_points", 2001);
  cfg.require(n >= 2, "n_points", "must be >= 2");

  const PhysicalParams pg = to_gamma_units(p);
  std::vector<double> t(n), tg(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = r.lo + (r.hi - r.lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    tg[i] = t[i] * p.gamma;
  }
  const WavepacketCurves c = evaluate_curves(pg, tg);

  std::ostringstream ss;
  CsvWriter w(ss);
  echo_config(w, "wavepacket", cfg);
  w.comment(std::string("regime = ") + to_string(derive_params(p).regime));
  w.header({"t_s", "rho1", "rho2_first", "rho2_second_marginal"});
  for (std::size_t i = 0; i < n; ++i) {
    w.row({t[i], c.rho1[i] * p.gamma, c.rho2_first[i] * p.gamma, c.rho2_second_marginal[i] * p.gamma});
  }
  emit(cfg.get_string("out", ""), ss.str(), out);
  return kExitOk;
}

int cmd_simulate(const Config& cfg, std::ostream& out) {
  const PhysicalParams p = physical(cfg);
  const PhysicalParams pg = to_gamma_units(p);
  const std::string mode_name = cfg.get_string("mode", "single");
  cfg.require(mode_name == "single" || mode_name == "double", "mode", "must be single or double");
  const EmissionMode mode = mode_name == "single" ? EmissionMode::single : EmissionMode::pair;
  const std::uint64_t n_traj = cfg.get_uint("n_traj", 1000);
  cfg.require(n_traj >= 1, "n_traj", "must be >= 1");
  const std::uint64_t seed = cfg.get_uint("seed", 1);
  const double factor = cfg.get_double("t_max_factor", 40.0);
  cfg.require(factor > 0.0, "t_max_factor", "must be > 0");
  const std::string backend = cfg.get_string("backend", "analytic");
  cfg.require(backend == "analytic" || backend == "ode", "backend", "must be analytic or ode");
  const auto workers = static_cast<unsigned>(cfg.get_uint("workers", 1));

  SamplerOptions so;
  so.t_max = factor / pg.chi;
  so.backend = backend == "ode" ? PropagationBackend::ode : PropagationBackend::analytic;
  so.ode.tol = cfg.get_double("ode_tol", 1e-10);
  cfg.require(so.ode.tol >= 1e-14 && so.ode.tol <= 1e-3, "ode_tol", "must lie in [1e-14, 1e-3]");
  const std::vector<EmissionRecord> recs = run_ensemble(pg, n_traj, mode, seed, so, workers);

  std::ostringstream ss;
  CsvWriter w(ss);
  echo_config(w, "simulate", cfg);
  w.header({"mode", "seed_id", "t1_s", "t2_s", "censored"});
  const auto fmt_time = [&](const std::optional<double>& t) { return t ? format_number(*t / p.gamma) : std::string(); };
  for (const EmissionRecord& r : recs) {
    w.raw_row({mode_name, std::to_string(r.seed_id), fmt_time(r.t1), mode == EmissionMode::pair ? fmt_time(r.t2) : "",
               r.censored ? "1" : "0"});
  }
  emit(cfg.get_string("out", ""), ss.str(), out);

  const std::string hist_out = cfg.get_string("hist_out", "");
  if (hist_out.empty()) return kExitOk;
  std::vector<Statistic> stats;
  for (const std::string& s : cfg.get_list("statistics", mode == EmissionMode::single ? "t1" : "t1,t2,tau,pooled")) {
    if (s == "t1") {
      stats.push_back(Statistic::t1);
    } else if (s == "t2" || s == "tau" || s == "pooled") {
      cfg.require(mode == EmissionMode::pair, "statistics", "'" + s + "' needs mode = double");
      stats.push_back(s == "t2" ? Statistic::t2 : s == "tau" ? Statistic::tau : Statistic::pooled);
    } else {
      cfg.require(false, "statistics", "has unknown entry '" + s + "'");
    }
  }
  cfg.require(!stats.empty(), "statistics", "must not be empty");
  const Range r = time_range(cfg, factor / p.collective_rate());
  const std::uint64_t n_bins = cfg.get_uint("n_bins", 100);
  cfg.require(n_bins >= 1, "n_bins", "must be >= 1");
  const std::vector<double> edges_g = uniform_edges(r.lo * p.gamma, r.hi * p.gamma, n_bins);
  std::vector<Histogram> hists;
  for (const Statistic s : stats) hists.push_back(bin_records(recs, edges_g, s));

  std::ostringstream hs;
  CsvWriter hw(hs);
  echo_config(hw, "simulate", cfg);
  std::vector<std::string> cols{"t_lo_s", "t_hi_s", "t_s"};
  for (const Statistic s : stats) {
    cols.push_back(std::string("counts_") + to_string(s));
    cols.push_back(std::string("density_") + to_string(s));
  }
  hw.header(cols);
  std::vector<std::vector<double>> dens;
  for (const Histogram& h : hists) dens.push_back(h.density());
  for (std::size_t b = 0; b < n_bins; ++b) {
    const double lo = edges_g[b] / p.gamma;
    const double hi = edges_g[b + 1] / p.gamma;
    std::vector<std::optional<double>> row{lo, hi, 0.5 * (lo + hi)};
    for (std::size_t k = 0; k < hists.size(); ++k) {
      row.emplace_back(static_cast<double>(hists[k].counts[b]));
      row.emplace_back(dens[k][b] * p.gamma);
    }
    hw.row(row);
  }
  emit(hist_out, hs.str(), out);
  return kExitOk;
}

int cmd_chi(const Config& cfg, std::ostream& out) {
  cfg.require(cfg.has("w0_m") && cfg.has("k_ge_per_m"), "w0_m", "and k_ge_per_m are required (mode geometry)");
  ModeGeometry g;
  g.w0 = cfg.get_double("w0_m", std::nullopt);
  cfg.require(g.w0 > 0.0, "w0_m", "must be > 0");
  g.k_ge = cfg.get_double("k_ge_per_m", std::nullopt);
  cfg.require(g.k_ge > 0.0, "k_ge_per_m", "must be > 0");
  const std::uint64_t n_atoms = cfg.get_uint("cloud_atoms", 0);

  std::optional<AtomCloud> cloud;
  if (n_atoms > 0) {
    GaussianCloudSpec spec;
    spec.n_atoms = n_atoms;
    spec.w0 = g.w0;
    spec.k_ge = g.k_ge;
    spec.sigma_perp = cfg.get_double("cloud_sigma_perp_m", 3.0 * g.w0);
    cfg.require(spec.sigma_perp > 0.0, "cloud_sigma_perp_m", "must be > 0");
    spec.sigma_z = cfg.get_double("cloud_sigma_z_m", 6.0 * g.w0);
    cfg.require(spec.sigma_z > 0.0, "cloud_sigma_z_m", "must be > 0");
    spec.write_angle = cfg.get_double("write_angle_rad", spec.write_angle);
    spec.seed = cfg.get_uint("seed", 1);
    cloud = make_gaussian_cloud(spec);
  }
  const std::optional<double> cloud_n_eff = cloud ? std::optional(effective_atom_number(*cloud)) : std::nullopt;
  g.n_eff = cfg.get_double("n_eff", cloud_n_eff);
  cfg.require(g.n_eff >= 0.0, "n_eff", "must be >= 0");

  std::string rep;
  rep += report_line("w0_k_ge", g.w0 * g.k_ge);
  rep += report_line("paraxial", g.paraxial());
  rep += report_line("n_eff", g.n_eff);
  rep += report_line("chi_closed_form", chi_closed_form(g));
  const double cap = cfg.get_double("cap_half_angle_rad", 0.0);
  cfg.require(cap >= 0.0 && cap < 0.5 * std::numbers::pi, "cap_half_angle_rad", "must lie in [0, pi/2)");
  const CapQuadratureResult cq = chi_cap_quadrature(g, cap);
  rep += report_line("chi_cap", cq.chi);
  rep += report_line("chi_cap_abs_error", cq.abs_error);
  rep += report_line("chi_cap_half_angle_rad", cq.cap_half_angle);
  rep += report_line("chi_cap_truncated", cq.truncated);

  if (cloud) {
    DiscreteChiOptions dopts;
    dopts.n_directions = cfg.get_uint("n_directions", dopts.n_directions);
    cfg.require(dopts.n_directions >= 10000, "n_directions", "must be >= 10000");
    dopts.seed = cfg.get_uint("seed", 1);
    const DiscreteChiResult d = chi_discrete(*cloud, g.k_ge, dopts);
    ModeGeometry gc = g;
    gc.n_eff = *cloud_n_eff;
    rep += report_line("cloud_atoms", static_cast<std::size_t>(n_atoms));
    rep += report_line("cloud_n_eff", *cloud_n_eff);
    rep += report_line("chi_closed_form_cloud", chi_closed_form(gc));
    rep += report_line("chi_discrete", d.chi);
    rep += report_line("chi_discrete_stderr", d.std_error);
    rep += report_line("chi_discrete_cap_part", d.cap_part);
    rep += report_line("chi_discrete_remainder_part", d.remainder_part);
    rep += report_line("chi_discrete_cap_half_angle_rad", d.cap_half_angle);
    rep += report_line("chi_full_sphere", chi_full_sphere(*cloud, g.k_ge));

    const std::string map_path = cfg.get_string("phi_map_out", "");
    if (!map_path.empty()) {
      const PhiMap m = phi_map(*cloud, g.k_ge, d.cap_half_angle, 64, 64);
      std::ostringstream ms;
      CsvWriter w(ms);
      echo_config(w, "chi", cfg);
      w.header({"theta_rad", "phi_rad", "intensity"});
      for (std::size_t i = 0; i < m.theta.size(); ++i) w.row({m.theta[i], m.phi[i], m.intensity[i]});
      emit(map_path, ms.str(), out);
    }
  }

  const bool any_od = cfg.has("chi_ref") || cfg.has("od_ref") || cfg.has("od_new");
  if (any_od) {
    const double chi_ref = cfg.get_double("chi_ref", std::nullopt);
    const double od_ref = cfg.get_double("od_ref", std::nullopt);
    const double od_new = cfg.get_double("od_new", std::nullopt);
    cfg.require(chi_ref >= 1.0, "chi_ref", "must be >= 1");
    cfg.require(od_ref > 0.0, "od_ref", "must be > 0");
    cfg.require(od_new >= 0.0, "od_new", "must be >= 0");
    rep += report_line("chi_from_od", chi_from_od(chi_ref, od_ref, od_new));
  }
  emit(cfg.get_string("out", ""), rep, out);
  return kExitOk;
}

int cmd_fit(const Config& cfg, std::ostream& out, std::ostream& err) {
  cfg.require(cfg.has("data"), "data", "is required (CSV with bin centers and counts)");
  const std::string path = cfg.get_string("data", "");
  const CsvTable table = parse_csv(read_file(path), path);
  const std::string tcol = cfg.get_string("time_column", "t_s");
  const std::string ccol = cfg.get_string("counts_column", "counts");
  const auto ti = table.column(tcol);
  const auto ci = table.column(ccol);
  if (!ti) throw ConfigError(path + ": no column named '" + tcol + "'");
  if (!ci) throw ConfigError(path + ": no column named '" + ccol + "'");
  std::vector<double> centers, counts;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const double c = table.rows[i][*ci];
    if (c < 0.0) throw ConfigError(path + ":" + std::to_string(table.line_numbers[i]) + ": negative count");
    centers.push_back(table.rows[i][*ti]);
    counts.push_back(c);
  }
  if (centers.size() < 2) throw ConfigError(path + ": need at least two data rows");
  BinnedData data;
  try {
    data = BinnedData::from_centers(centers, counts);
  } catch (const ParameterError& e) {
    throw ConfigError(path + ": " + e.what());
  }

  FitModel model;
  model.kind = density_kind(cfg);
  model.gamma = cfg.get_double("gamma_rad_s", kDefaultGamma);
  cfg.require(model.gamma > 0.0, "gamma_rad_s", "must be > 0");
  model.free.clear();
  for (const std::string& name : cfg.get_list("free", "chi,omega0,amplitude_scale,background,t_offset")) {
    const auto fp = parse_fit_param(name);
    cfg.require(fp.has_value(), "free", "has unknown parameter '" + name + "'");
    model.free.push_back(*fp);
  }
  cfg.require(!model.free.empty(), "free", "must name at least one parameter");

  FitValues init;
  init.chi = cfg.get_double("chi", std::nullopt);
  cfg.require(init.chi >= 1.0, "chi", "must be >= 1");
  init.omega0 = cfg.get_double("omega0_rad_s", std::nullopt);
  cfg.require(init.omega0 > 0.0, "omega0_rad_s", "must be > 0");
  init.background = cfg.get_double("background_per_s", 0.0);
  cfg.require(init.background >= 0.0, "background_per_s", "must be >= 0");
  init.t_offset = cfg.get_double("t_offset_s", 0.0);
  const double span = data.bin_edges.back() - data.bin_edges.front();
  init.amplitude_scale = cfg.get_double("amplitude_scale", 0.0);
  if (init.amplitude_scale == 0.0) init.amplitude_scale = std::max(data.total() - init.background * span, 1.0);
  cfg.require(init.amplitude_scale > 0.0, "amplitude_scale", "must be >= 0");

  std::vector<std::pair<double, double>> ranges;
  for (const std::string& item : cfg.get_list("mask", "")) {
    const auto colon = item.find(':');
    cfg.require(colon != std::string::npos, "mask", "entries must look like lo:hi, got '" + item + "'");
    Config tmp;
    tmp.set("t_lo_s", item.substr(0, colon), "mask");
    tmp.set("t_hi_s", item.substr(colon + 1), "mask");
    ranges.emplace_back(tmp.get_double("t_lo_s", std::nullopt), tmp.get_double("t_hi_s", std::nullopt));
    cfg.require(ranges.back().second >= ranges.back().first, "mask", "range '" + item + "' has hi < lo");
  }
  const std::vector<std::size_t> mask = mask_from_ranges(data, ranges);

  FitOptions opts;
  opts.max_iter = cfg.get_uint("max_iter", opts.max_iter);
  cfg.require(opts.max_iter >= 1, "max_iter", "must be >= 1");

  FitResult res;
  try {
    res = masked_fit(data, model, init, mask, opts);
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }

  std::string rep;
  rep += report_line("kind", std::string(to_string(model.kind)));
  rep += report_line("converged", res.converged);
  rep += report_line("n_iter", res.n_iter);
  rep += report_line("n_used_bins", res.n_used_bins);
  rep += report_line("chi2", res.chi2);
  rep += report_line("chi2_reduced", res.chi2_reduced);
  rep += report_line("gradient_cosine", res.gradient_cosine);
  static const std::map<FitParam, std::string> si_name = {{FitParam::chi, "chi"},
                                                          {FitParam::omega0, "omega0_rad_s"},
                                                          {FitParam::amplitude_scale, "amplitude_scale"},
                                                          {FitParam::background, "background_per_s"},
                                                          {FitParam::t_offset, "t_offset_s"}};
  for (const auto& [fp, name] : si_name) {
    rep += report_line(name, res.estimates[fp]);
    rep += report_line(name + "_stderr", res.standard_error(fp));
  }
  const EnvelopeReport env = envelope_check(res, data);
  rep += report_line("envelope_insufficient", env.insufficient);
  rep += report_line("envelope_n_maxima", env.n_maxima);
  rep += report_line("envelope_measured_rate_per_s", env.measured_rate);
  rep += report_line("envelope_predicted_rate_per_s", env.predicted_rate);
  rep += report_line("envelope_ratio", env.ratio);
  emit(cfg.get_string("out", ""), rep, out);

  const std::string res_path = cfg.get_string("residuals_out", "");
  if (!res_path.empty()) {
    std::vector<bool> masked(data.n_bins(), false);
    for (const std::size_t i : mask) masked[i] = true;
    std::ostringstream ss;
    CsvWriter w(ss);
    echo_config(w, "fit", cfg);
    w.header({"t_s", "counts", "model", "weighted_residual", "masked"});
    for (std::size_t i = 0; i < data.n_bins(); ++i) {
      const double c = data.counts[i];
      const double m = res.expected[i];
      w.row({centers[i], c, m, (c - m) / std::sqrt(std::max(c, 1.0)), masked[i] ? 1.0 : 0.0});
    }
    emit(res_path, ss.str(), out);
  }
  if (!res.converged) {
    err << "fit did not converge after " << res.n_iter << " iterations (gradient cosine "
        << format_number(res.gradient_cosine) << "); best point reported\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

int cmd_synth(const Config& cfg, std::ostream& out) {
  SynthSpec spec;
  spec.params = physical(cfg);
  spec.kind = density_kind(cfg);
  const Range r = time_range(cfg, 40.0 / spec.params.collective_rate());
  const std::uint64_t n_bins = cfg.get_uint("n_bins", 100);
  cfg.require(n_bins >= 2, "n_bins", "must be >= 2");
  spec.bin_edges = uniform_edges(r.lo, r.hi, n_bins);
  spec.total_counts = cfg.get_double("amplitude_scale", 1e5);
  cfg.require(spec.total_counts >= 0.0, "amplitude_scale", "must be >= 0");
  spec.background = cfg.get_double("background_per_s", 0.0);
  cfg.require(spec.background >= 0.0, "background_per_s", "must be >= 0");
  spec.t_offset = cfg.get_double("t_offset_s", 0.0);
  spec.poisson = cfg.get_bool("poisson", true);
  spec.seed = cfg.get_uint("seed", 1);
  const BinnedData d = synthesize_histogram(spec);

  std::ostringstream ss;
  CsvWriter w(ss);
  echo_config(w, "synth", cfg);
  w.header({"t_s", "counts"});
  for (std::size_t b = 0; b < d.n_bins(); ++b) w.row({0.5 * (d.bin_edges[b] + d.bin_edges[b + 1]), d.counts[b]});
  emit(cfg.get_string("out", ""), ss.str(), out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"srmem: superradiant read-out wavepackets, trajectories, enhancement and fits"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every command");

  // config files may hold any known key; each command only takes its own keys as flags
  struct Command {
    std::string name, help;
    std::set<std::string> keys;
  };
  const std::set<std::string> physics = {"omega0_rad_s", "gamma_rad_s", "chi"};
  const auto with_physics = [&](std::set<std::string> keys) {
    keys.insert(physics.begin(), physics.end());
    return keys;
  };
  const std::vector<Command> commands = {
      {"wavepacket", "theory curves rho1, rho2_first, rho2_second_marginal on a time grid",
       with_physics({"t_lo_s", "t_hi_s", "n_points", "out"})},
      {"simulate", "quantum-trajectory emission records and histograms",
       with_physics({"t_lo_s", "t_hi_s", "n_bins", "n_traj", "seed", "mode", "backend", "ode_tol", "t_max_factor",
                     "workers", "statistics", "out", "hist_out"})},
      {"chi", "superradiance enhancement by closed form, cap quadrature and discrete sum",
       {"w0_m", "k_ge_per_m", "n_eff", "cap_half_angle_rad", "cloud_atoms", "cloud_sigma_perp_m", "cloud_sigma_z_m",
        "write_angle_rad", "n_directions", "phi_map_out", "chi_ref", "od_ref", "od_new", "seed", "out"}},
      {"fit", "least-squares fit of binned detection times",
       with_physics({"data", "time_column", "counts_column", "kind", "free", "amplitude_scale", "background_per_s",
                     "t_offset_s", "mask", "max_iter", "residuals_out", "out"})},
      {"synth", "synthetic binned data from the closed-form densities",
       with_physics({"t_lo_s", "t_hi_s", "n_bins", "kind", "amplitude_scale", "background_per_s", "t_offset_s",
                     "poisson", "seed", "out"})},
  };
  std::string config_path;
  std::map<std::string, std::string> flags;
  std::map<std::string, CLI::App*> subs;
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("-c,--config", config_path, "key = value configuration file");
    for (const KeySpec& k : known_keys()) {
      if (!c.keys.contains(std::string(k.name))) continue;
      sub->add_option("--" + std::string(k.name), flags[std::string(k.name)], std::string(k.help));
    }
    subs[c.name] = sub;
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  std::string name;
  for (const auto& [n, sub] : subs) {
    if (sub->parsed()) name = n;
  }
  try {
    Config cfg;
    if (!config_path.empty()) cfg.load_file(config_path);
    CLI::App* sub = subs.at(name);
    for (const KeySpec& k : known_keys()) {
      const std::string key(k.name);
      if (sub->get_option_no_throw("--" + key) != nullptr && sub->count("--" + key) > 0) {
        cfg.set(key, flags[key], "--" + key);
      }
    }
    if (name == "wavepacket") return cmd_wavepacket(cfg, out);
    if (name == "simulate") return cmd_simulate(cfg, out);
    if (name == "chi") return cmd_chi(cfg, out);
    if (name == "fit") return cmd_fit(cfg, out, err);
    if (name == "synth") return cmd_synth(cfg, out);
    err << "error: no command given\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const FitError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNotConverged;
  } catch (const IntegrationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNotConverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace srmem::cli
