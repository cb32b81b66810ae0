// Deterministic pseudo-random streams.
//
// Standard-library distributions are implementation-defined, so everything
// here is hand-specified (splitmix64) to keep generated systems, sample
// plans and fuzz trials bit-identical across platforms and runs.
// substream(i) derives an independent stream from (state, i) without
// advancing the parent, which makes per-index generation order-independent.

#ifndef ERGO_RNG_HPP
#define ERGO_RNG_HPP

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ergo {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() { return splitmix64_next(state_); }

  /// Unbiased integer in [0, n) via masked rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    if (n == 1) return 0;
    const std::uint64_t mask = ~std::uint64_t{0} >> std::countl_zero(n - 1);
    for (;;) {
      const std::uint64_t v = next() & mask;
      if (v < n) return v;
    }
  }

  /// Integer in [lo, hi], inclusive.
  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw std::invalid_argument("Rng::range: empty range");
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(below(span));
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool coin() { return (next() & 1) != 0; }

  template <class T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[below(i)]);
    }
  }

  /// Independent stream for index `i`; does not advance this stream.
  Rng substream(std::uint64_t index) const {
    std::uint64_t s = state_ ^ (0xd1b54a32d192ed03ull * (index + 1) + 0x8bb84b93962eacc9ull);
    splitmix64_next(s);
    return Rng(s);
  }

 private:
  std::uint64_t state_;
};

}  // namespace ergo

#endif  // ERGO_RNG_HPP
