#include "swapcomb/rng.hpp"

namespace swapcomb {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t CounterRng::mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CounterRng CounterRng::derive(std::initializer_list<std::uint64_t> labels) const {
  std::uint64_t h = mix64(key_ ^ 0x6A09E667F3BCC909ULL);
  for (std::uint64_t label : labels) {
    h = mix64(h + kGolden + mix64(label + 0x3C6EF372FE94F82BULL));
  }
  return CounterRng(h);
}

CounterRng CounterRng::derive(std::string_view label) const {
  // FNV-1a over the label bytes, then the integer path.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return derive({h});
}

std::uint64_t CounterRng::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double CounterRng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t CounterRng::next_below(std::uint64_t n) {
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

}  // namespace swapcomb
