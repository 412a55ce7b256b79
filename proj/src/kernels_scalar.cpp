#include "creco/kernels.hpp"

#include <cmath>

namespace creco::kernels::scalar {

void ucb_fill(const std::uint32_t* counts, const double* sums, std::size_t n,
              double bonus_beta, double unvisited, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    if (counts[i] == 0) {
      out[i] = unvisited;
    } else {
      const double cnt = static_cast<double>(counts[i]);
      out[i] = sums[i] / cnt + std::sqrt(bonus_beta / cnt);
    }
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void lerp(const double* a, const double* b, double t, std::size_t n,
          double* out) {
  const double u = 1.0 - t;
  for (std::size_t i = 0; i < n; ++i) out[i] = u * a[i] + t * b[i];
}

void scale(const double* a, double s, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = s * a[i];
}

}  // namespace creco::kernels::scalar
