#include "coaldetect/rng.hpp"

#include <cmath>

namespace coaldetect {

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = splitmix64(master ^ 0x6a09e667f3bcc909ULL);
  for (const std::uint64_t index : path) {
    h = splitmix64(h ^ splitmix64(index + 0x3c6ef372fe94f82bULL));
  }
  return h;
}

Rng::Rng(std::uint64_t seed) noexcept {
  std::uint64_t x = seed;
  for (auto& word : s_) {
    x += 0x9e3779b97f4a7c15ULL;
    word = splitmix64(x);
  }
}

double Rng::exponential(double rate) noexcept {
  // 1 - uniform() lies in (0, 1], so the log is finite.
  return -std::log(1.0 - uniform()) / rate;
}

}  // namespace coaldetect
