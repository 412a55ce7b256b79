#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "creco/kernels.hpp"
#include "doctest.h"

namespace k = creco::kernels;

namespace {

struct KernelInputs {
  std::vector<std::uint32_t> counts;
  std::vector<double> sums;
  std::vector<double> a;
  std::vector<double> b;
};

// Deterministic mixed-magnitude inputs, including zero counts in several lane
// positions so the blend path of the vector variant is exercised.
KernelInputs make_inputs(std::size_t n, std::uint64_t seed) {
  KernelInputs in;
  std::uint64_t state = seed * 2654435761u + 1;
  const auto next = [&state] {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return state;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t count =
        (next() % 5 == 0) ? 0u : static_cast<std::uint32_t>(next() % 100000 + 1);
    in.counts.push_back(count);
    in.sums.push_back(count * (static_cast<double>(next() % 1000) / 1000.0));
    in.a.push_back(static_cast<double>(next() % 2000001) / 1000000.0 - 1.0);
    in.b.push_back(static_cast<double>(next() % 2000001) / 1000000.0 - 1.0);
  }
  return in;
}

bool bitwise_equal(const std::vector<double>& x, const std::vector<double>& y) {
  return x.size() == y.size() &&
         (x.empty() ||
          std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0);
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar ucb_fill matches the formula and the unvisited branch") {
  const std::uint32_t counts[3] = {0, 1, 4};
  const double sums[3] = {0.0, 0.5, 2.0};
  double out[3];
  k::scalar::ucb_fill(counts, sums, 3, 9.0, 1.0, out);
  CHECK_EQ(out[0], 1.0);
  CHECK_EQ(out[1], 0.5 + 3.0);
  CHECK_EQ(out[2], 2.0 / 4.0 + std::sqrt(9.0 / 4.0));
}

TEST_CASE("scalar dot, lerp, scale reference behavior") {
  const double a[2] = {0.5, -0.25};
  const double b[2] = {2.0, 4.0};
  CHECK_EQ(k::scalar::dot(a, b, 2), 0.0);
  double out[2];
  k::scalar::lerp(a, b, 0.5, 2, out);
  CHECK_EQ(out[0], 1.25);
  CHECK_EQ(out[1], 1.875);
  k::scalar::scale(a, -2.0, 2, out);
  CHECK_EQ(out[0], -1.0);
  CHECK_EQ(out[1], 0.5);
}

TEST_CASE("dispatch selects by name and reports the active set") {
  const std::string original = k::active().name;
  REQUIRE(k::select("scalar"));
  CHECK_EQ(std::string(k::active().name), "scalar");
  CHECK_FALSE(k::select("no-such-set"));
  CHECK_EQ(std::string(k::active().name), "scalar");
  k::select(original.c_str());
}

#ifdef CRECO_HAVE_AVX2_BUILD
TEST_CASE("avx2 elementwise kernels are bit-identical to scalar") {
  const std::string original = k::active().name;
  if (!k::select("avx2")) {
    MESSAGE("avx2 unavailable on this CPU; skipping");
    return;
  }
  for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 16u, 33u, 200u}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const KernelInputs in = make_inputs(n, seed ^ (n * 977));
      std::vector<double> s(n), v(n);

      k::scalar::ucb_fill(in.counts.data(), in.sums.data(), n, 23.02585,
                          1.0, s.data());
      k::avx2::ucb_fill(in.counts.data(), in.sums.data(), n, 23.02585, 1.0,
                        v.data());
      CHECK(bitwise_equal(s, v));

      k::scalar::lerp(in.a.data(), in.b.data(), 0.37, n, s.data());
      k::avx2::lerp(in.a.data(), in.b.data(), 0.37, n, v.data());
      CHECK(bitwise_equal(s, v));

      k::scalar::scale(in.a.data(), -1.7, n, s.data());
      k::avx2::scale(in.a.data(), -1.7, n, v.data());
      CHECK(bitwise_equal(s, v));
    }
  }
  k::select(original.c_str());
}

TEST_CASE("avx2 dot agrees with scalar within reduction tolerance") {
  const std::string original = k::active().name;
  if (!k::select("avx2")) {
    MESSAGE("avx2 unavailable on this CPU; skipping");
    return;
  }
  for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 8u, 13u, 64u, 301u}) {
    const KernelInputs in = make_inputs(n, n * 31 + 7);
    const double s = k::scalar::dot(in.a.data(), in.b.data(), n);
    const double v = k::avx2::dot(in.a.data(), in.b.data(), n);
    const double scale = std::max(1.0, std::abs(s));
    CHECK(std::abs(s - v) <= 1e-12 * scale);
  }
  // Short vectors take the scalar tail path only, so the reduction is
  // order-identical and exact agreement is expected.
  for (std::size_t n : {1u, 2u, 3u}) {
    const KernelInputs in = make_inputs(n, n + 100);
    CHECK_EQ(k::scalar::dot(in.a.data(), in.b.data(), n),
             k::avx2::dot(in.a.data(), in.b.data(), n));
  }
  k::select(original.c_str());
}
#endif

}  // TEST_SUITE
