#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace heavytail {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t &state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

} // namespace detail

/// xoshiro256** stream. Streams are keyed: derive(master, {year, iteration})
/// yields a generator that depends only on the key, never on how many other
/// streams were drawn before it, which is what makes parallel bootstrap
/// results independent of the worker count.
class RandomStream {
public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed = 0) noexcept { reseed(seed); }

  static RandomStream derive(std::uint64_t master,
                             std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t key = master;
    std::uint64_t mix = detail::splitmix64(key);
    for (std::uint64_t component : path) {
      std::uint64_t s = mix ^ (component + 0x632be59bd9b4e019ULL);
      mix = detail::splitmix64(s);
    }
    return RandomStream(mix);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept { return next(); }

  result_type next() noexcept {
    const std::uint64_t result = detail::rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits; identical on every platform.
  double uniform01() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

private:
  void reseed(std::uint64_t seed) noexcept {
    for (auto &word : state_)
      word = detail::splitmix64(seed);
  }

  std::array<std::uint64_t, 4> state_{};
};

} // namespace heavytail
