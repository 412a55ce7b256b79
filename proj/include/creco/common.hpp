#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace creco {

/// Thrown when an operation receives input outside its documented contract.
/// The CLI maps this to exit code 1 (validation failure).
class RejectedInput : public std::invalid_argument {
 public:
  explicit RejectedInput(const std::string& what) : std::invalid_argument(what) {}
};

// All simulation randomness flows through one engine type so that a run is
// fully determined by its seed.
using Rng = std::mt19937_64;

/// Uniform double in [0,1) built from the top 53 bits of one engine draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Tolerance applied to every unit-ball membership test.
inline constexpr double kBallTolerance = 1e-9;

/// Shortest decimal representation that round-trips the value exactly.
/// Used by every CSV writer; byte-identical output is part of the contract.
std::string format_double(double value);

}  // namespace creco
