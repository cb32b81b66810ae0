// Lebesgue-measure-preserving maps of the unit interval [0, 1).
//
// State representation per kind:
//  * rotation, interval exchange, identity: float64 (isometries; rounding
//    error does not amplify along orbits);
//  * doubling: exact rational p/q with q odd, where 2x mod 1 permutes the
//    q-denominator grid and orbits are exactly periodic. Iterating the
//    doubling map in float64 loses one mantissa bit per step and collapses
//    to 0 after ~53 steps, so the float orbit API rejects it; a single
//    float application is exact and stays available for sampling checks.

#ifndef ERGO_INTERVAL_SYSTEM_HPP
#define ERGO_INTERVAL_SYSTEM_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ergo/observable.hpp"
#include "ergo/rational.hpp"
#include "ergo/rng.hpp"

namespace ergo {

enum class IntervalKind { rotation, doubling, interval_exchange, identity };

inline const char* kind_name(IntervalKind k) {
  switch (k) {
    case IntervalKind::rotation: return "rotation";
    case IntervalKind::doubling: return "doubling";
    case IntervalKind::interval_exchange: return "interval_exchange";
    case IntervalKind::identity: return "identity";
  }
  return "?";
}

class IntervalSystem {
 public:
  static IntervalSystem rotation(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
      throw std::invalid_argument("rotation: alpha must lie in (0, 1)");
    }
    IntervalSystem sys(IntervalKind::rotation);
    sys.alpha_ = alpha;
    return sys;
  }

  static IntervalSystem doubling() { return IntervalSystem(IntervalKind::doubling); }

  static IntervalSystem identity() { return IntervalSystem(IntervalKind::identity); }

  static IntervalSystem interval_exchange(std::vector<Rational> lengths,
                                          std::vector<std::size_t> permutation) {
    const std::size_t k = lengths.size();
    if (k == 0 || permutation.size() != k) {
      throw std::invalid_argument("interval_exchange: lengths/permutation size mismatch");
    }
    Rational total(0);
    for (const Rational& len : lengths) {
      if (len <= 0) throw std::invalid_argument("interval_exchange: lengths must be positive");
      total += len;
    }
    if (total != 1) {
      throw std::invalid_argument("interval_exchange: lengths must sum to 1, got " +
                                  format_rational(total));
    }
    std::vector<bool> seen(k, false);
    for (std::size_t image : permutation) {
      if (image >= k || seen[image]) {
        throw std::invalid_argument("interval_exchange: permutation is not a bijection");
      }
      seen[image] = true;
    }
    IntervalSystem sys(IntervalKind::interval_exchange);
    sys.lengths_ = std::move(lengths);
    sys.permutation_ = std::move(permutation);
    // Source left endpoints, and target left endpoints after reordering:
    // interval i is translated to start at the total length of the intervals
    // placed before position permutation[i].
    std::vector<Rational> target_left(k, Rational(0));
    {
      std::vector<Rational> at_position(k);
      for (std::size_t i = 0; i < k; ++i) at_position[sys.permutation_[i]] = sys.lengths_[i];
      std::vector<Rational> prefix(k, Rational(0));
      Rational acc(0);
      for (std::size_t pos = 0; pos < k; ++pos) {
        prefix[pos] = acc;
        acc += at_position[pos];
      }
      for (std::size_t i = 0; i < k; ++i) target_left[i] = prefix[sys.permutation_[i]];
    }
    Rational acc(0);
    sys.src_left_.resize(k);
    sys.dst_left_.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      sys.src_left_[i] = to_double(acc);
      sys.dst_left_[i] = to_double(target_left[i]);
      acc += sys.lengths_[i];
    }
    return sys;
  }

  IntervalKind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  const std::vector<Rational>& lengths() const { return lengths_; }
  const std::vector<std::size_t>& permutation() const { return permutation_; }
  bool exact_state() const { return kind_ == IntervalKind::doubling; }

  /// One application with float64 state. Doubling is exact here too (2x is a
  /// mantissa-preserving operation), but see orbit() for the iteration rule.
  double apply(double x) const {
    switch (kind_) {
      case IntervalKind::identity:
        return x;
      case IntervalKind::rotation: {
        double y = x + alpha_;
        if (y >= 1.0) y -= 1.0;
        return y;
      }
      case IntervalKind::doubling: {
        double y = 2.0 * x;
        if (y >= 1.0) y -= 1.0;
        return y;
      }
      case IntervalKind::interval_exchange: {
        std::size_t i = src_left_.size() - 1;
        while (i > 0 && x < src_left_[i]) --i;
        return x - src_left_[i] + dst_left_[i];
      }
    }
    return x;
  }

  /// One application with exact rational state (doubling and identity only).
  Rational apply(const Rational& x) const {
    if (x < 0 || x >= 1) throw std::invalid_argument("apply: point outside [0, 1)");
    switch (kind_) {
      case IntervalKind::identity:
        return x;
      case IntervalKind::doubling: {
        if (denominator(x) % 2 == 0) {
          throw std::domain_error(
              "doubling map: exact state requires an odd denominator (got " +
              format_rational(x) + ")");
        }
        Rational y = 2 * x;
        if (y >= 1) y -= 1;
        return y;
      }
      default:
        throw std::domain_error(std::string("exact state not supported for kind ") +
                                kind_name(kind_));
    }
  }

  /// Float orbit (x, Tx, ..., T^{m-1}x). Rejected for the doubling map,
  /// whose float iteration is numerically meaningless.
  std::vector<double> orbit(double x, std::size_t m) const {
    if (m == 0) throw std::invalid_argument("orbit: m must be positive");
    if (kind_ == IntervalKind::doubling) {
      throw std::domain_error("doubling map: float64 iteration is forbidden; use rational state");
    }
    std::vector<double> out;
    out.reserve(m);
    out.push_back(x);
    for (std::size_t k = 1; k < m; ++k) out.push_back(apply(out.back()));
    return out;
  }

  /// Exact orbit for rational-state kinds.
  std::vector<Rational> orbit(const Rational& x, std::size_t m) const {
    if (m == 0) throw std::invalid_argument("orbit: m must be positive");
    std::vector<Rational> out;
    out.reserve(m);
    out.push_back(x);
    for (std::size_t k = 1; k < m; ++k) out.push_back(apply(out.back()));
    return out;
  }

 private:
  explicit IntervalSystem(IntervalKind kind) : kind_(kind) {}

  IntervalKind kind_;
  double alpha_ = 0.0;
  std::vector<Rational> lengths_;
  std::vector<std::size_t> permutation_;
  std::vector<double> src_left_;
  std::vector<double> dst_left_;
};

// ---------------------------------------------------------------------------

/// Quadrature plan on [0, 1): equispaced midpoints or a seeded pseudo-random
/// design. point(i) depends only on (plan, i), never on evaluation order.
struct SamplePlan {
  enum class Mode { grid, pseudorandom };

  Mode mode = Mode::pseudorandom;
  std::uint64_t count = 0;
  std::uint64_t seed = 0;

  double point(std::uint64_t i) const {
    if (mode == Mode::grid) {
      return (static_cast<double>(i) + 0.5) / static_cast<double>(count);
    }
    return Rng(seed).substream(i).unit();
  }
};

inline SamplePlan grid_plan(std::uint64_t count) {
  if (count == 0) throw std::invalid_argument("sample plan needs count >= 1");
  return SamplePlan{SamplePlan::Mode::grid, count, 0};
}

inline SamplePlan random_plan(std::uint64_t count, std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("sample plan needs count >= 1");
  return SamplePlan{SamplePlan::Mode::pseudorandom, count, seed};
}

/// Sampled invariance check |lam(Tx) - lam(x)| <= tol at the plan's points.
inline bool is_invariant(const IntervalSystem& sys, const IntervalObservable& lam,
                         const SamplePlan& plan, double tol = 1e-9) {
  for (std::uint64_t i = 0; i < plan.count; ++i) {
    const double x = plan.point(i);
    const double diff = lam.value(sys.apply(x)) - lam.value(x);
    if (diff > tol || diff < -tol) return false;
  }
  return true;
}

}  // namespace ergo

#endif  // ERGO_INTERVAL_SYSTEM_HPP
