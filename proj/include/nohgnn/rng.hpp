#pragma once

#include <cstdint>

namespace nohgnn {

enum class SeedStream : std::uint64_t {
  split = 1,
  val_negatives = 2,
  test_negatives = 3,
  init = 4,
  train_negatives = 5,
};

// splitmix64 finalizer over (seed, stream, index); independent streams from one
// user seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream, std::uint64_t index = 0) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(stream) * 0x100000001ull + index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace nohgnn
