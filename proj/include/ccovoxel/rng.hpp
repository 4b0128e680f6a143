#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace ccv {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Hash a sequence of integers into a stream key. Order-sensitive.
inline constexpr std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

/// Counter-based generator: the i-th output of a stream depends only on
/// (key, i), so streams split by key are independent and can be consumed in
/// any order or on any thread. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t key, std::uint64_t counter = 0)
      : key_(key), counter_(counter) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    return splitmix64(key_ ^ splitmix64(counter_++ + 0x632be59bd9b4e019ULL));
  }

  /// Child stream identified by tag; does not advance this stream.
  constexpr CounterRng split(std::uint64_t tag) const {
    return CounterRng(derive_seed({key_, tag}));
  }

  constexpr std::uint64_t key() const { return key_; }
  constexpr std::uint64_t counter() const { return counter_; }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace ccv
