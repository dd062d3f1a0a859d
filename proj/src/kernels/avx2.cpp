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

// AVX2+FMA variants. This translation unit is the only one compiled with
// -mavx2 -mfma; nothing here may run before dispatch has checked the CPU.

#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "propagator_terms.hpp"
#include "srmem/kernels/kernels.hpp"

namespace srmem::kernels::avx2 {
namespace {

// pi/2 split in three parts, the first two carrying 33 significant bits
constexpr double kPio2_1 = 1.57079632673412561417e+00;
constexpr double kPio2_2 = 6.07710050630396597660e-11;
constexpr double kPio2_3 = 2.02226624879595063154e-21;
constexpr double kTwoOverPi = 6.36619772367581382433e-01;

constexpr double kLn2Hi = 6.93147180369123816490e-01;
constexpr double kLn2Lo = 1.90821492927058770002e-10;
constexpr double kLog2e = 1.44269504088896338700e+00;

inline __m256d set1(double v) { return _mm256_set1_pd(v); }

inline __m256d poly_sin(__m256d r, __m256d r2) {
  __m256d p = set1(1.58962301576546568060e-10);
  p = _mm256_fmadd_pd(p, r2, set1(-2.50507477628578072866e-8));
  p = _mm256_fmadd_pd(p, r2, set1(2.75573136213857245213e-6));
  p = _mm256_fmadd_pd(p, r2, set1(-1.98412698295895385996e-4));
  p = _mm256_fmadd_pd(p, r2, set1(8.33333333332211858878e-3));
  p = _mm256_fmadd_pd(p, r2, set1(-1.66666666666666307295e-1));
  return _mm256_fmadd_pd(_mm256_mul_pd(p, r2), r, r);
}

inline __m256d poly_cos(__m256d r2) {
  __m256d p = set1(-1.13585365213876817300e-11);
  p = _mm256_fmadd_pd(p, r2, set1(2.08757008419747316778e-9));
  p = _mm256_fmadd_pd(p, r2, set1(-2.75573141792967388112e-7));
  p = _mm256_fmadd_pd(p, r2, set1(2.48015872888517045348e-5));
  p = _mm256_fmadd_pd(p, r2, set1(-1.38888888888730564116e-3));
  p = _mm256_fmadd_pd(p, r2, set1(4.16666666666665929218e-2));
  const __m256d r4 = _mm256_mul_pd(r2, r2);
  return _mm256_fmadd_pd(p, r4, _mm256_fnmadd_pd(set1(0.5), r2, set1(1.0)));
}

// Valid for |x| < 2^20 * pi/2; callers stay far below that.
inline void sincos_pd(__m256d x, __m256d* s_out, __m256d* c_out) {
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, set1(kTwoOverPi)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, set1(kPio2_1), x);
  r = _mm256_fnmadd_pd(n, set1(kPio2_2), r);
  r = _mm256_fnmadd_pd(n, set1(kPio2_3), r);
  const __m256d r2 = _mm256_mul_pd(r, r);
  const __m256d ps = poly_sin(r, r2);
  const __m256d pc = poly_cos(r2);

  const __m256i q = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(n));
  const __m256i one = _mm256_set1_epi64x(1);
  const __m256d swap = _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(q, one), one));
  __m256d s = _mm256_blendv_pd(ps, pc, swap);
  __m256d c = _mm256_blendv_pd(pc, ps, swap);
  // sin negated for quadrants 2,3; cos for quadrants 1,2
  const __m256i two = _mm256_set1_epi64x(2);
  const __m256i sflip = _mm256_slli_epi64(_mm256_and_si256(q, two), 62);
  const __m256i cflip = _mm256_slli_epi64(_mm256_and_si256(_mm256_add_epi64(q, one), two), 62);
  s = _mm256_xor_pd(s, _mm256_castsi256_pd(sflip));
  c = _mm256_xor_pd(c, _mm256_castsi256_pd(cflip));
  *s_out = s;
  *c_out = c;
}

// exp(x) for x <= 709; returns 0 below the double underflow limit.
inline __m256d exp_pd(__m256d x) {
  const __m256d lo = set1(-708.0);
  const __m256d underflow = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  x = _mm256_max_pd(x, lo);
  x = _mm256_min_pd(x, set1(709.0));
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, set1(kLog2e)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, set1(kLn2Hi), x);
  r = _mm256_fnmadd_pd(n, set1(kLn2Lo), r);
  // Taylor to degree 13 on |r| <= ln2/2
  __m256d p = set1(1.0 / 6227020800.0);
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 479001600.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, set1(0.5));
  p = _mm256_fmadd_pd(p, r, set1(1.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0));
  const __m256i ni = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(n));
  const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(ni, _mm256_set1_epi64x(1023)), 52);
  const __m256d y = _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
  return _mm256_andnot_pd(underflow, y);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d abs_pd(__m256d v) { return _mm256_andnot_pd(set1(-0.0), v); }

}  // namespace

void exp(std::span<const double> x, std::span<double> out) {
  std::size_t i = 0;
  for (; i + 4 <= x.size(); i += 4) {
    _mm256_storeu_pd(out.data() + i, exp_pd(_mm256_loadu_pd(x.data() + i)));
  }
  for (; i < x.size(); ++i) out[i] = std::exp(x[i]);
}

void sincos(std::span<const double> x, std::span<double> s, std::span<double> c) {
  std::size_t i = 0;
  for (; i + 4 <= x.size(); i += 4) {
    __m256d vs, vc;
    sincos_pd(_mm256_loadu_pd(x.data() + i), &vs, &vc);
    _mm256_storeu_pd(s.data() + i, vs);
    _mm256_storeu_pd(c.data() + i, vc);
  }
  for (; i < x.size(); ++i) {
    s[i] = std::sin(x[i]);
    c[i] = std::cos(x[i]);
  }
}

void propagate(const Propagator& prop, double alpha0, double beta0, std::span<const double> t,
               std::span<double> alpha, std::span<double> beta) {
  const double k = prop.k;
  const double h = prop.h;
  const double w = std::sqrt(std::abs(prop.w_sq));
  const double ka = k * alpha0 + h * beta0;
  const double kb = -h * alpha0 - k * beta0;

  const __m256d vk = set1(k);
  const __m256d vw = set1(w);
  const __m256d vwsq = set1(prop.w_sq);
  const __m256d thresh = set1(detail::kSeriesThreshold);
  const bool oscillating = prop.w_sq > 0.0;
  const double slow_rate = oscillating ? 0.0 : h * h / (w + k);
  const double inv_w = w > 0.0 ? 1.0 / w : 0.0;

  std::size_t i = 0;
  for (; i + 4 <= t.size(); i += 4) {
    const __m256d vt = _mm256_loadu_pd(t.data() + i);
    // series branch, always evaluated and blended in where |w t| is tiny
    const __m256d u = _mm256_mul_pd(vwsq, _mm256_mul_pd(vt, vt));
    __m256d pc = _mm256_fmadd_pd(set1(-1.0 / 720.0), u, set1(1.0 / 24.0));
    pc = _mm256_fmadd_pd(pc, u, set1(-0.5));
    pc = _mm256_fmadd_pd(pc, u, set1(1.0));
    __m256d ps = _mm256_fmadd_pd(set1(-1.0 / 5040.0), u, set1(1.0 / 120.0));
    ps = _mm256_fmadd_pd(ps, u, set1(-1.0 / 6.0));
    ps = _mm256_fmadd_pd(ps, u, set1(1.0));
    ps = _mm256_mul_pd(ps, vt);
    const __m256d decay = exp_pd(_mm256_mul_pd(_mm256_sub_pd(_mm256_setzero_pd(), vk), vt));

    __m256d ec, es;
    if (oscillating) {
      __m256d sn, cs;
      sincos_pd(_mm256_mul_pd(vw, vt), &sn, &cs);
      ec = _mm256_mul_pd(decay, cs);
      es = _mm256_mul_pd(decay, _mm256_mul_pd(sn, set1(inv_w)));
    } else {
      const __m256d slow = exp_pd(_mm256_mul_pd(set1(-slow_rate), vt));
      const __m256d fast = exp_pd(_mm256_mul_pd(set1(-(w + k)), vt));
      ec = _mm256_mul_pd(set1(0.5), _mm256_add_pd(slow, fast));
      es = _mm256_mul_pd(set1(0.5 * inv_w), _mm256_sub_pd(slow, fast));
    }
    const __m256d small = _mm256_cmp_pd(abs_pd(_mm256_mul_pd(vw, vt)), thresh, _CMP_LT_OQ);
    ec = _mm256_blendv_pd(ec, _mm256_mul_pd(decay, pc), small);
    es = _mm256_blendv_pd(es, _mm256_mul_pd(decay, ps), small);

    _mm256_storeu_pd(alpha.data() + i, _mm256_fmadd_pd(es, set1(ka), _mm256_mul_pd(ec, set1(alpha0))));
    _mm256_storeu_pd(beta.data() + i, _mm256_fmadd_pd(es, set1(kb), _mm256_mul_pd(ec, set1(beta0))));
  }
  for (; i < t.size(); ++i) {
    const detail::DampedTerms e = detail::damped_terms(prop, t[i]);
    alpha[i] = e.c * alpha0 + e.s * ka;
    beta[i] = e.c * beta0 + e.s * kb;
  }
}

void structure_factor(const Scatterers& s, std::span<const double> qx, std::span<const double> qy,
                      std::span<const double> qz, std::span<double> out) {
  const std::size_t n = s.size();
  const std::size_t n4 = n - n % 4;
  for (std::size_t j = 0; j < qx.size(); ++j) {
    const __m256d vqx = set1(qx[j]);
    const __m256d vqy = set1(qy[j]);
    const __m256d vqz = set1(qz[j]);
    __m256d re = _mm256_setzero_pd();
    __m256d im = _mm256_setzero_pd();
    for (std::size_t i = 0; i < n4; i += 4) {
      __m256d ph = _mm256_mul_pd(vqx, _mm256_loadu_pd(s.x.data() + i));
      ph = _mm256_fmadd_pd(vqy, _mm256_loadu_pd(s.y.data() + i), ph);
      ph = _mm256_fmadd_pd(vqz, _mm256_loadu_pd(s.z.data() + i), ph);
      __m256d sn, cs;
      sincos_pd(ph, &sn, &cs);
      const __m256d wr = _mm256_loadu_pd(s.wr.data() + i);
      const __m256d wi = _mm256_loadu_pd(s.wi.data() + i);
      re = _mm256_add_pd(re, _mm256_fmsub_pd(wr, cs, _mm256_mul_pd(wi, sn)));
      im = _mm256_add_pd(im, _mm256_fmadd_pd(wr, sn, _mm256_mul_pd(wi, cs)));
    }
    double sre = hsum(re);
    double sim = hsum(im);
    for (std::size_t i = n4; i < n; ++i) {
      const double ph = qx[j] * s.x[i] + qy[j] * s.y[i] + qz[j] * s.z[i];
      const double c = std::cos(ph);
      const double sn = std::sin(ph);
      sre += s.wr[i] * c - s.wi[i] * sn;
      sim += s.wr[i] * sn + s.wi[i] * c;
    }
    out[j] = sre * sre + sim * sim;
  }
}

double pair_sinc_sum(const Scatterers& s, double k_mag, double krx, double kry, double krz) {
  const std::size_t n = s.size();
  const __m256d vk = set1(k_mag);
  const __m256d vkrx = set1(krx);
  const __m256d vkry = set1(kry);
  const __m256d vkrz = set1(krz);
  const __m256d tiny = set1(1e-4);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const __m256d xi = set1(s.x[i]);
    const __m256d yi = set1(s.y[i]);
    const __m256d zi = set1(s.z[i]);
    const __m256d wri = set1(s.wr[i]);
    const __m256d wii = set1(s.wi[i]);
    __m256d acc = _mm256_setzero_pd();
    std::size_t j = i + 1;
    for (; j + 4 <= n; j += 4) {
      const __m256d dx = _mm256_sub_pd(xi, _mm256_loadu_pd(s.x.data() + j));
      const __m256d dy = _mm256_sub_pd(yi, _mm256_loadu_pd(s.y.data() + j));
      const __m256d dz = _mm256_sub_pd(zi, _mm256_loadu_pd(s.z.data() + j));
      __m256d d2 = _mm256_mul_pd(dx, dx);
      d2 = _mm256_fmadd_pd(dy, dy, d2);
      d2 = _mm256_fmadd_pd(dz, dz, d2);
      const __m256d kd = _mm256_mul_pd(vk, _mm256_sqrt_pd(d2));
      __m256d skd, ckd;
      sincos_pd(kd, &skd, &ckd);
      const __m256d small = _mm256_cmp_pd(kd, tiny, _CMP_LT_OQ);
      // guard the division; small lanes take the series value
      const __m256d safe_kd = _mm256_blendv_pd(kd, set1(1.0), small);
      const __m256d series = _mm256_fnmadd_pd(_mm256_mul_pd(kd, kd), set1(1.0 / 6.0), set1(1.0));
      const __m256d sinc = _mm256_blendv_pd(_mm256_div_pd(skd, safe_kd), series, small);

      __m256d ph = _mm256_mul_pd(vkrx, dx);
      ph = _mm256_fmadd_pd(vkry, dy, ph);
      ph = _mm256_fmadd_pd(vkrz, dz, ph);
      __m256d sph, cph;
      sincos_pd(ph, &sph, &cph);
      const __m256d wrj = _mm256_loadu_pd(s.wr.data() + j);
      const __m256d wij = _mm256_loadu_pd(s.wi.data() + j);
      const __m256d ar = _mm256_fmadd_pd(wri, wrj, _mm256_mul_pd(wii, wij));
      const __m256d ai = _mm256_fmsub_pd(wii, wrj, _mm256_mul_pd(wri, wij));
      const __m256d term = _mm256_fmsub_pd(ar, cph, _mm256_mul_pd(ai, sph));
      acc = _mm256_fmadd_pd(term, sinc, acc);
    }
    double row = hsum(acc);
    for (; j < n; ++j) {
      const double dx = s.x[i] - s.x[j];
      const double dy = s.y[i] - s.y[j];
      const double dz = s.z[i] - s.z[j];
      const double kd = k_mag * std::sqrt(dx * dx + dy * dy + dz * dz);
      const double sinc = kd < 1e-4 ? 1.0 - kd * kd / 6.0 : std::sin(kd) / kd;
      const double ph = krx * dx + kry * dy + krz * dz;
      const double ar = s.wr[i] * s.wr[j] + s.wi[i] * s.wi[j];
      const double ai = s.wi[i] * s.wr[j] - s.wr[i] * s.wi[j];
      row += (ar * std::cos(ph) - ai * std::sin(ph)) * sinc;
    }
    total += row;
  }
  return 2.0 * total;
}

}  // namespace srmem::kernels::avx2
