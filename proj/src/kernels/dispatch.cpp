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

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "srmem/kernels/kernels.hpp"

namespace srmem::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(SRMEM_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa default_isa() {
  Isa best = cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
  if (const char* env = std::getenv("SRMEM_ISA")) {
    const std::string v(env);
    if (v == "scalar") return Isa::scalar;
    if (v == "avx2" && best == Isa::avx2) return Isa::avx2;
  }
  return best;
}

std::atomic<Isa>& active_slot() {
  static std::atomic<Isa> slot{default_isa()};
  return slot;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "?";
}

bool supported(Isa isa) { return isa == Isa::scalar || cpu_has_avx2(); }

Isa active() { return active_slot().load(std::memory_order_relaxed); }

ScopedIsa::ScopedIsa(Isa isa) : previous_(active()) {
  if (!supported(isa)) {
    throw std::runtime_error("kernel variant not supported on this CPU: " + std::string(to_string(isa)));
  }
  active_slot().store(isa, std::memory_order_relaxed);
}

ScopedIsa::~ScopedIsa() { active_slot().store(previous_, std::memory_order_relaxed); }

void propagate(const Propagator& prop, double alpha0, double beta0, std::span<const double> t,
               std::span<double> alpha, std::span<double> beta) {
  if (alpha.size() < t.size() || beta.size() < t.size()) {
    throw std::invalid_argument("propagate: output spans shorter than time grid");
  }
  if (active() == Isa::avx2) {
    avx2::propagate(prop, alpha0, beta0, t, alpha, beta);
  } else {
    scalar::propagate(prop, alpha0, beta0, t, alpha, beta);
  }
}

void structure_factor(const Scatterers& s, std::span<const double> qx, std::span<const double> qy,
                      std::span<const double> qz, std::span<double> out) {
  if (qy.size() != qx.size() || qz.size() != qx.size() || out.size() < qx.size()) {
    throw std::invalid_argument("structure_factor: mismatched wavevector spans");
  }
  if (active() == Isa::avx2) {
    avx2::structure_factor(s, qx, qy, qz, out);
  } else {
    scalar::structure_factor(s, qx, qy, qz, out);
  }
}

double pair_sinc_sum(const Scatterers& s, double k_mag, double krx, double kry, double krz) {
  if (active() == Isa::avx2) return avx2::pair_sinc_sum(s, k_mag, krx, kry, krz);
  return scalar::pair_sinc_sum(s, k_mag, krx, kry, krz);
}

#if !defined(SRMEM_HAVE_AVX2)
// Not compiled for this target; supported(Isa::avx2) is false so these are
// unreachable through dispatch.
namespace avx2 {
[[noreturn]] static void unavailable() { throw std::runtime_error("AVX2 kernels not compiled in"); }
void propagate(const Propagator&, double, double, std::span<const double>, std::span<double>,
               std::span<double>) { unavailable(); }
void structure_factor(const Scatterers&, std::span<const double>, std::span<const double>,
                      std::span<const double>, std::span<double>) { unavailable(); }
double pair_sinc_sum(const Scatterers&, double, double, double, double) { unavailable(); }
void exp(std::span<const double>, std::span<double>) { unavailable(); }
void sincos(std::span<const double>, std::span<double>, std::span<double>) { unavailable(); }
}  // namespace avx2
#endif

}  // namespace srmem::kernels
