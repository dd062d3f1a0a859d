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

#include "cli/config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace srmem::cli {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool is_known(std::string_view key) {
  const auto& keys = known_keys();
  return std::any_of(keys.begin(), keys.end(), [&](const KeySpec& k) { return k.name == key; });
}

}  // namespace

const std::vector<KeySpec>& known_keys() {
  static const std::vector<KeySpec> keys = {
      {"omega0_rad_s", "Rabi frequency of the read beam, rad/s"},
      {"gamma_rad_s", "single-atom decay rate, rad/s (default 2*pi*6.07e6, Rb D2 line)"},
      {"chi", "superradiance enhancement, >= 1"},
      {"t_lo_s", "start of the time grid or binning range, s"},
      {"t_hi_s", "end of the time grid or binning range, s (default 40/(chi*gamma))"},
      {"n_points", "wavepacket grid points"},
      {"n_bins", "histogram bins"},
      {"n_traj", "number of trajectories"},
      {"seed", "random seed"},
      {"mode", "simulate: single | double"},
      {"backend", "simulate: analytic | ode"},
      {"ode_tol", "simulate: tolerance of the ode backend"},
      {"t_max_factor", "simulate: horizon in units of 1/(chi*gamma)"},
      {"workers", "simulate: worker threads (0 = all cores)"},
      {"statistics", "simulate: histogram statistics, comma list of t1,t2,tau,pooled"},
      {"out", "primary output file (default: standard output)"},
      {"hist_out", "simulate: histogram CSV file"},
      {"w0_m", "mode waist, m"},
      {"k_ge_per_m", "emission wavenumber, 1/m"},
      {"n_eff", "effective atom number"},
      {"cap_half_angle_rad", "chi: cap half angle for the quadrature (0 = automatic)"},
      {"cloud_atoms", "chi: sampled atoms for the discrete route (0 = skip)"},
      {"cloud_sigma_perp_m", "chi: rms transverse cloud radius, m (default 3*w0)"},
      {"cloud_sigma_z_m", "chi: rms axial cloud length, m (default 6*w0)"},
      {"write_angle_rad", "chi: angle between write beam and field 1, rad"},
      {"n_directions", "chi: Monte Carlo directions off the cap"},
      {"phi_map_out", "chi: CSV file for |S(k)|^2 around the phase-matched direction"},
      {"chi_ref", "chi: reference enhancement for OD scaling"},
      {"od_ref", "chi: optical depth at chi_ref"},
      {"od_new", "chi: optical depth to scale to"},
      {"data", "fit: input CSV with bin centers and counts"},
      {"time_column", "fit: name of the bin-center column (default t_s)"},
      {"counts_column", "fit: name of the counts column (default counts)"},
      {"kind", "fit, synth: single | first | second_marginal"},
      {"free", "fit: free parameters, comma list of chi,omega0,amplitude_scale,background,t_offset"},
      {"amplitude_scale", "fit: initial wavepacket counts (0 = data total); synth: expected counts"},
      {"background_per_s", "fit: initial background; synth: background rate, counts/s"},
      {"t_offset_s", "fit: initial time offset; synth: time offset, s"},
      {"mask", "fit: excluded time ranges, comma list of lo:hi in s"},
      {"max_iter", "fit: iteration limit"},
      {"residuals_out", "fit: residuals CSV file"},
      {"poisson", "synth: draw Poisson counts (true) or write expectations (false)"},
  };
  return keys;
}

void Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  load_text(ss.str(), path);
}

void Config::load_text(std::string_view text, const std::string& origin) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = origin + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    set(key, trim(std::string_view(body).substr(eq + 1)), where);
  }
}

void Config::set(const std::string& key, const std::string& value, const std::string& origin) {
  if (!is_known(key)) throw ConfigError(origin + ": unknown key '" + key + "'");
  values_[key] = value;
  origins_[key] = origin;
}

std::optional<std::string> Config::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Config::origin_of(const std::string& key) const {
  const auto it = origins_.find(key);
  return it == origins_.end() ? "default" : it->second;
}

void Config::require(bool ok, const std::string& key, const std::string& what) const {
  if (!ok) throw ConfigError(origin_of(key) + ": " + key + " " + what);
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return raw(key).value_or(fallback);
}

double Config::get_double(const std::string& key, std::optional<double> fallback) const {
  const auto v = raw(key);
  if (!v) {
    require(fallback.has_value(), key, "is required");
    return *fallback;
  }
  double out = 0.0;
  const char* b = v->data();
  const char* e = b + v->size();
  const auto [ptr, ec] = std::from_chars(b, e, out);
  require(ec == std::errc() && ptr == e && std::isfinite(out), key, "must be a finite number, got '" + *v + "'");
  return out;
}

std::uint64_t Config::get_uint(const std::string& key, std::optional<std::uint64_t> fallback) const {
  const auto v = raw(key);
  if (!v) {
    require(fallback.has_value(), key, "is required");
    return *fallback;
  }
  std::uint64_t out = 0;
  const char* b = v->data();
  const char* e = b + v->size();
  const auto [ptr, ec] = std::from_chars(b, e, out);
  require(ec == std::errc() && ptr == e, key, "must be a non-negative integer, got '" + *v + "'");
  return out;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  require(false, key, "must be true or false, got '" + *v + "'");
  return fallback;
}

std::vector<std::string> Config::get_list(const std::string& key, const std::string& fallback) const {
  const std::string s = get_string(key, fallback);
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t c = s.find(',', pos);
    const std::string item = trim(std::string_view(s).substr(pos, c == std::string::npos ? std::string::npos : c - pos));
    if (!item.empty()) out.push_back(item);
    if (c == std::string::npos) break;
    pos = c + 1;
  }
  return out;
}

}  // namespace srmem::cli
