#pragma once

#include <cstddef>
#include <cstdint>

// Arithmetic inner loops used by the hot paths (UCB table refresh, dot
// products, content interpolation). Each kernel has a scalar reference
// implementation and, on x86-64, an AVX2 variant selected at runtime after a
// cpuid check. Elementwise kernels (ucb_fill, lerp, scale) are required to
// match the scalar reference bit-for-bit: every lane operation is a single
// correctly-rounded IEEE op. dot is a reduction, so the vector variant may
// differ in summation order; it is held to a small relative error instead.

namespace creco::kernels {

namespace scalar {

// out[i] = counts[i] == 0 ? unvisited
//                         : sums[i]/counts[i] + sqrt(bonus_beta/counts[i])
// counts must stay below 2^31 (signed lane conversion in the SIMD variant).
void ucb_fill(const std::uint32_t* counts, const double* sums, std::size_t n,
              double bonus_beta, double unvisited, double* out);

double dot(const double* a, const double* b, std::size_t n);

// out[i] = (1-t)*a[i] + t*b[i]
void lerp(const double* a, const double* b, double t, std::size_t n,
          double* out);

// out[i] = s*a[i]
void scale(const double* a, double s, std::size_t n, double* out);

}  // namespace scalar

#ifdef CRECO_HAVE_AVX2_BUILD
namespace avx2 {
void ucb_fill(const std::uint32_t* counts, const double* sums, std::size_t n,
              double bonus_beta, double unvisited, double* out);
double dot(const double* a, const double* b, std::size_t n);
void lerp(const double* a, const double* b, double t, std::size_t n,
          double* out);
void scale(const double* a, double s, std::size_t n, double* out);
}  // namespace avx2
#endif

struct KernelSet {
  void (*ucb_fill)(const std::uint32_t*, const double*, std::size_t, double,
                   double, double*);
  double (*dot)(const double*, const double*, std::size_t);
  void (*lerp)(const double*, const double*, double, std::size_t, double*);
  void (*scale)(const double*, double, std::size_t, double*);
  const char* name;
};

/// Active kernel set. Resolved once on first use: AVX2 when the CPU supports
/// it, scalar otherwise. The environment variable CREATOR_ECON_SIMD
/// ("scalar" or "avx2") overrides the automatic choice.
const KernelSet& active();

/// Force a specific kernel set by name. Returns false (and leaves the active
/// set unchanged) if that set is unavailable on this machine.
bool select(const char* name);

inline void ucb_fill(const std::uint32_t* counts, const double* sums,
                     std::size_t n, double bonus_beta, double unvisited,
                     double* out) {
  active().ucb_fill(counts, sums, n, bonus_beta, unvisited, out);
}

inline double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}

inline void lerp(const double* a, const double* b, double t, std::size_t n,
                 double* out) {
  active().lerp(a, b, t, n, out);
}

inline void scale(const double* a, double s, std::size_t n, double* out) {
  active().scale(a, s, n, out);
}

}  // namespace creco::kernels
