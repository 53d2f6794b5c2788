#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

namespace swapcomb {

// Counter-based SplitMix64 stream ("splitmix64-ctr", version "1").
//
// Output n of a stream with key k is mix64(k + (n + 1) * 0x9E3779B97F4A7C15),
// where mix64 is the SplitMix64 finalizer. Substreams are derived by hashing
// the parent key with a label, so any (seed, k, l) triple has its own stream
// that does not depend on how many draws other streams have made.
class CounterRng {
 public:
  static constexpr std::string_view kAlgorithm = "splitmix64-ctr";
  static constexpr std::string_view kVersion = "1";

  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static std::uint64_t mix64(std::uint64_t z);

  CounterRng derive(std::initializer_list<std::uint64_t> labels) const;
  CounterRng derive(std::string_view label) const;

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double next_double();
  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace swapcomb
