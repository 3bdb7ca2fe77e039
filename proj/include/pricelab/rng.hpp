#pragma once

#include <cstdint>
#include <random>

namespace pricelab {

using RngEngine = std::mt19937_64;

// Independent substreams per trial: consuming one stream never perturbs
// another, so covariates / shocks / parameter draws pair across policies.
enum class Stream : std::uint32_t {
  kParamDraw = 1,
  kCovariates = 2,
  kDemandShock = 3,
  kPolicy = 4,
};

inline RngEngine make_stream(std::uint64_t seed, Stream purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffULL),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose)};
  return RngEngine(seq);
}

inline std::uint64_t trial_seed(std::uint64_t experiment_seed, int trial_index) {
  return experiment_seed ^ static_cast<std::uint64_t>(trial_index);
}

}  // namespace pricelab
