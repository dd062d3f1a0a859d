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

#include "srmem/superradiance.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "srmem/kernels/kernels.hpp"
#include "srmem/params.hpp"
#include "srmem/trajectories.hpp"

namespace srmem {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTruncationWidths = 5.0;  // minimum cap, in units of 1/(w0 k)
constexpr double kAutoCapWidths = 10.0;

void require(bool ok, const std::string& msg) {
  if (!ok) throw ParameterError(msg);
}

bool finite(Vec3 v) { return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z); }

struct Frame {
  Vec3 axis, e1, e2;
};

// Orthonormal frame with axis along -k_1.
Frame cap_frame(const AtomCloud& c) {
  const double n1 = norm(c.k_1);
  Frame f;
  f.axis = (-1.0 / n1) * c.k_1;
  const Vec3 seed = std::abs(f.axis.x) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
  const Vec3 e1 = cross(f.axis, seed);
  f.e1 = (1.0 / norm(e1)) * e1;
  f.e2 = cross(f.axis, f.e1);
  return f;
}

Vec3 direction(const Frame& f, double cos_t, double sin_t, double phi) {
  return cos_t * f.axis + (sin_t * std::cos(phi)) * f.e1 + (sin_t * std::sin(phi)) * f.e2;
}

// Structure-of-arrays copy of the cloud for the kernels.
struct SoA {
  std::vector<double> x, y, z, wr, wi;
  explicit SoA(const AtomCloud& c) {
    const std::size_t n = c.size();
    x.resize(n), y.resize(n), z.resize(n), wr.resize(n), wi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = c.positions[i].x;
      y[i] = c.positions[i].y;
      z[i] = c.positions[i].z;
      wr[i] = c.weights[i].real();
      wi[i] = c.weights[i].imag();
    }
  }
  kernels::Scatterers view() const { return {x, y, z, wr, wi}; }
};

// |S(k)|^2 for unit directions d, with q = k_r - k_ge d.
std::vector<double> intensities(const SoA& soa, const AtomCloud& c, double k_ge, const std::vector<Vec3>& dirs) {
  const std::size_t m = dirs.size();
  std::vector<double> qx(m), qy(m), qz(m), out(m);
  for (std::size_t j = 0; j < m; ++j) {
    qx[j] = c.k_r.x - k_ge * dirs[j].x;
    qy[j] = c.k_r.y - k_ge * dirs[j].y;
    qz[j] = c.k_r.z - k_ge * dirs[j].z;
  }
  kernels::structure_factor(soa.view(), qx, qy, qz, out);
  return out;
}

double diagonal(const AtomCloud& c) {
  double d = 0.0;
  for (const auto& w : c.weights) d += std::norm(w);
  return d;
}

// rms transverse extent of |alpha|^2 about its centroid, perpendicular to the cap axis
double weight_width(const AtomCloud& c, const Frame& f) {
  Vec3 centroid;
  double total = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double w = std::norm(c.weights[i]);
    centroid = centroid + w * c.positions[i];
    total += w;
  }
  centroid = (1.0 / total) * centroid;
  double m2 = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Vec3 d = c.positions[i] - centroid;
    const double a = dot(d, f.e1);
    const double b = dot(d, f.e2);
    m2 += std::norm(c.weights[i]) * (a * a + b * b);
  }
  return std::sqrt(2.0 * m2 / total);
}

}  // namespace

double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

void validate(const ModeGeometry& g) {
  require(std::isfinite(g.w0) && g.w0 > 0.0, "ModeGeometry.w0 must be finite and > 0");
  require(std::isfinite(g.k_ge) && g.k_ge > 0.0, "ModeGeometry.k_ge must be finite and > 0");
  require(std::isfinite(g.n_eff) && g.n_eff >= 0.0, "ModeGeometry.n_eff must be finite and >= 0");
}

double chi_closed_form(const ModeGeometry& g) {
  validate(g);
  const double wk = g.w0 * g.k_ge;
  return 1.0 + g.n_eff / (2.0 * wk * wk);
}

CapQuadratureResult chi_cap_quadrature(const ModeGeometry& g, double cap_half_angle) {
  validate(g);
  const double wk = g.w0 * g.k_ge;
  if (cap_half_angle == 0.0) cap_half_angle = std::min(kAutoCapWidths / wk, 0.5 * kPi * (1.0 - 1e-9));
  require(std::isfinite(cap_half_angle) && cap_half_angle > 0.0 && cap_half_angle < 0.5 * kPi,
          "cap_half_angle must lie in (0, pi/2)");
  CapQuadratureResult r;
  r.cap_half_angle = cap_half_angle;
  r.truncated = cap_half_angle < kTruncationWidths / wk;
  if (g.n_eff == 0.0) return r;
  // |Phi|^2 depends only on the transverse wavevector k sin(theta), so the
  // azimuthal integral is 2 pi and the cap integral reduces to the polar angle.
  const auto f = [wk](double theta) {
    const double s = wk * std::sin(theta);
    return std::exp(-0.5 * s * s) * std::sin(theta);
  };
  double err = 0.0;
  const double integral =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, cap_half_angle, 15, 1e-13, &err);
  // (1/4 pi k^2) |C|^2 * 2 pi k^2 * integral
  r.chi = 1.0 + 0.5 * g.n_eff * integral;
  r.abs_error = 0.5 * g.n_eff * err;
  return r;
}

void validate(const AtomCloud& c) {
  require(!c.positions.empty(), "AtomCloud: no atoms");
  require(c.positions.size() == c.weights.size(), "AtomCloud: positions and weights differ in length");
  for (std::size_t i = 0; i < c.size(); ++i) {
    require(finite(c.positions[i]), "AtomCloud: position " + std::to_string(i) + " is not finite");
    require(std::isfinite(c.weights[i].real()) && std::isfinite(c.weights[i].imag()),
            "AtomCloud: weight " + std::to_string(i) + " is not finite");
  }
  require(finite(c.k_r) && finite(c.k_1), "AtomCloud: wavevectors must be finite");
  require(norm(c.k_1) > 0.0, "AtomCloud: k_1 must be nonzero");
  require(std::abs(diagonal(c) - 1.0) <= 1e-12, "AtomCloud: weights must satisfy sum |alpha|^2 = 1");
}

void normalize_weights(AtomCloud& c) {
  const double d = diagonal(c);
  require(d > 0.0, "AtomCloud: all weights are zero");
  const double s = 1.0 / std::sqrt(d);
  for (auto& w : c.weights) w *= s;
}

double effective_atom_number(const AtomCloud& c) {
  validate(c);
  double s = 0.0;
  for (const auto& w : c.weights) s += std::abs(w);
  return s * s;
}

AtomCloud make_gaussian_cloud(const GaussianCloudSpec& spec) {
  require(spec.n_atoms >= 1, "GaussianCloudSpec.n_atoms must be >= 1");
  require(spec.w0 > 0.0 && spec.k_ge > 0.0, "GaussianCloudSpec: w0 and k_ge must be > 0");
  require(spec.sigma_perp >= 0.0 && spec.sigma_z >= 0.0, "GaussianCloudSpec: cloud sizes must be >= 0");
  RandomStream rng(spec.seed, 0);
  const auto gauss_pair = [&rng]() {
    const double r = std::sqrt(-2.0 * std::log(rng.uniform()));
    const double a = 2.0 * kPi * rng.uniform();
    return std::pair{r * std::cos(a), r * std::sin(a)};
  };
  AtomCloud c;
  c.k_1 = {0.0, 0.0, spec.k_ge};
  const Vec3 k_w{spec.k_ge * std::sin(spec.write_angle), 0.0, spec.k_ge * std::cos(spec.write_angle)};
  c.k_r = -1.0 * k_w;
  const Vec3 dk = k_w - c.k_1;
  c.positions.resize(spec.n_atoms);
  c.weights.resize(spec.n_atoms);
  const double inv_w2 = 1.0 / (spec.w0 * spec.w0);
  for (std::size_t i = 0; i < spec.n_atoms; ++i) {
    const auto [gx, gy] = gauss_pair();
    const double gz = gauss_pair().first;
    const Vec3 r{spec.sigma_perp * gx, spec.sigma_perp * gy, spec.sigma_z * gz};
    c.positions[i] = r;
    c.weights[i] = std::polar(std::exp(-(r.x * r.x + r.y * r.y) * inv_w2), dot(dk, r));
  }
  normalize_weights(c);
  return c;
}

DiscreteChiResult chi_discrete(const AtomCloud& c, double k_ge, const DiscreteChiOptions& opts) {
  validate(c);
  require(std::isfinite(k_ge) && k_ge > 0.0, "chi_discrete: k_ge must be > 0");
  require(opts.n_directions >= 10000, "chi_discrete: n_directions must be >= 10000");
  require(opts.cap_phi_nodes >= 8, "chi_discrete: cap_phi_nodes must be >= 8");

  DiscreteChiResult r;
  const Frame f = cap_frame(c);
  double cap = opts.cap_half_angle;
  if (cap == 0.0) {
    const double w = weight_width(c, f);
    cap = w > 0.0 ? std::min(kAutoCapWidths / (k_ge * w), 0.5 * kPi) : 0.5 * kPi;
  }
  require(std::isfinite(cap) && cap > 0.0 && cap < kPi, "chi_discrete: cap_half_angle must lie in (0, pi)");
  r.cap_half_angle = cap;
  if (c.size() == 1) return r;  // no pairs: the diagonal alone gives 1

  const SoA soa(c);
  const double diag = diagonal(c);

  // cap: Gauss-Legendre in theta, periodic trapezoid in phi
  using GL = boost::math::quadrature::gauss<double, 64>;
  const auto& xa = GL::abscissa();
  const auto& wa = GL::weights();
  const std::size_t n_phi = opts.cap_phi_nodes;
  std::vector<double> theta, theta_w;
  for (std::size_t i = 0; i < xa.size(); ++i) {
    for (const double sgn : {-1.0, 1.0}) {
      theta.push_back(0.5 * cap * (1.0 + sgn * xa[i]));
      theta_w.push_back(0.5 * cap * wa[i]);
    }
  }
  std::vector<Vec3> dirs;
  dirs.reserve(theta.size() * n_phi);
  for (const double t : theta) {
    for (std::size_t j = 0; j < n_phi; ++j) {
      dirs.push_back(direction(f, std::cos(t), std::sin(t), 2.0 * kPi * static_cast<double>(j) / n_phi));
    }
  }
  std::vector<double> s2 = intensities(soa, c, k_ge, dirs);
  double cap_sum = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    double ring = 0.0;
    for (std::size_t j = 0; j < n_phi; ++j) ring += s2[i * n_phi + j] - diag;
    cap_sum += theta_w[i] * std::sin(theta[i]) * ring * (2.0 * kPi / n_phi);
  }
  r.cap_part = cap_sum / (4.0 * kPi);

  // remainder: strata of equal area in (cos theta, phi), two samples each
  const std::size_t n_strata = opts.n_directions / 2;
  const std::size_t n_u = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(0.5 * n_strata)));
  const std::size_t n_v = n_strata / n_u;
  const double u_lo = -1.0;
  const double u_hi = std::cos(cap);
  const double du = (u_hi - u_lo) / n_u;
  const double dv = 2.0 * kPi / n_v;
  RandomStream rng(opts.seed, 0);
  dirs.clear();
  dirs.reserve(2 * n_u * n_v);
  for (std::size_t a = 0; a < n_u; ++a) {
    for (std::size_t b = 0; b < n_v; ++b) {
      for (int rep = 0; rep < 2; ++rep) {
        const double u = u_lo + (a + rng.uniform()) * du;
        const double v = (b + rng.uniform()) * dv;
        dirs.push_back(direction(f, u, std::sqrt(std::max(0.0, 1.0 - u * u)), v));
      }
    }
  }
  s2 = intensities(soa, c, k_ge, dirs);
  const double stratum_frac = (du * dv) / (4.0 * kPi);
  double rem = 0.0;
  double var = 0.0;
  for (std::size_t h = 0; h < n_u * n_v; ++h) {
    const double y1 = s2[2 * h] - diag;
    const double y2 = s2[2 * h + 1] - diag;
    rem += stratum_frac * 0.5 * (y1 + y2);
    var += stratum_frac * stratum_frac * 0.25 * (y1 - y2) * (y1 - y2);
  }
  r.remainder_part = rem;
  r.std_error = std::sqrt(var);
  r.n_directions = dirs.size();
  r.chi = 1.0 + r.cap_part + r.remainder_part;
  return r;
}

double chi_full_sphere(const AtomCloud& c, double k_ge) {
  validate(c);
  require(std::isfinite(k_ge) && k_ge > 0.0, "chi_full_sphere: k_ge must be > 0");
  if (c.size() == 1) return 1.0;
  const SoA soa(c);
  return 1.0 + kernels::pair_sinc_sum(soa.view(), k_ge, c.k_r.x, c.k_r.y, c.k_r.z);
}

double chi_from_od(double chi_ref, double od_ref, double od_new) {
  require(std::isfinite(chi_ref) && chi_ref >= 1.0, "chi_from_od: chi_ref must be >= 1");
  require(std::isfinite(od_ref) && od_ref > 0.0, "chi_from_od: od_ref must be > 0");
  require(std::isfinite(od_new) && od_new >= 0.0, "chi_from_od: od_new must be >= 0");
  return 1.0 + (chi_ref - 1.0) * od_new / od_ref;
}

PhiMap phi_map(const AtomCloud& c, double k_ge, double half_angle, std::size_t n_theta, std::size_t n_phi) {
  validate(c);
  require(k_ge > 0.0, "phi_map: k_ge must be > 0");
  require(half_angle > 0.0 && half_angle <= kPi, "phi_map: half_angle must lie in (0, pi]");
  require(n_theta >= 1 && n_phi >= 1, "phi_map: grid must be non-empty");
  const Frame f = cap_frame(c);
  PhiMap m;
  std::vector<Vec3> dirs;
  for (std::size_t i = 0; i < n_theta; ++i) {
    const double t = n_theta == 1 ? 0.0 : half_angle * static_cast<double>(i) / (n_theta - 1);
    for (std::size_t j = 0; j < n_phi; ++j) {
      const double p = 2.0 * kPi * static_cast<double>(j) / n_phi;
      m.theta.push_back(t);
      m.phi.push_back(p);
      dirs.push_back(direction(f, std::cos(t), std::sin(t), p));
    }
  }
  const SoA soa(c);
  m.intensity = intensities(soa, c, k_ge, dirs);
  return m;
}

}  // namespace srmem
