// Time averages along orbits and the objects built from them.
//
//   A_k f(x)   = (1/k) * sum_{j<k} f(T^j x)         (Birkhoff average)
//   f*_N(x)    = max_{1<=k<=N} A_k f(x)             (windowed maximal function)
//   f*(x)      = sup_k A_k f(x)                     (maximal function)
//   E_N        = { x : f*_N(x) > lambda(x) }        (strict level set)
//
// On finite systems everything is exact rational arithmetic. The running-sum
// evaluation makes A_1..A_K cost O(K). The unbounded sup has the closed form
// f*(x) = max(f*_{t+p}(x), c) where (t, p) is the orbit's preperiod/period
// and c the terminal-cycle average: any window k > t+p splits as a weighted
// mediant of a shorter window and whole cycles, so it cannot exceed both.
// The sup is attained iff f*_{t+p}(x) >= c.
//
// Interval systems get float64 estimates; limsup/liminf are reported as
// windowed proxies over [K/2, K] with the window in the output.

#ifndef ERGO_AVERAGES_HPP
#define ERGO_AVERAGES_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "ergo/finite_system.hpp"
#include "ergo/interval_system.hpp"
#include "ergo/observable.hpp"
#include "ergo/rational.hpp"

namespace ergo {

// ---------------------------------------------------------------------------
// Exact path (finite systems)

/// A_1 f(x), ..., A_K f(x) in one pass over the orbit.
inline std::vector<Rational> birkhoff_averages(const FiniteSystem& sys,
                                               const FiniteObservable& f, std::size_t x,
                                               std::size_t K) {
  if (K == 0) throw std::invalid_argument("birkhoff_averages: K must be positive");
  if (x >= sys.size()) throw std::invalid_argument("birkhoff_averages: point out of range");
  if (f.values.size() != sys.size()) {
    throw std::invalid_argument("birkhoff_averages: observable size mismatch");
  }
  std::vector<Rational> out;
  out.reserve(K);
  Rational sum(0);
  std::size_t y = x;
  for (std::size_t k = 1; k <= K; ++k) {
    sum += f.values[y];
    out.push_back(sum / static_cast<unsigned long>(k));
    y = sys.map[y];
  }
  return out;
}

inline Rational birkhoff_average(const FiniteSystem& sys, const FiniteObservable& f,
                                 std::size_t x, std::size_t k) {
  if (k == 0) throw std::invalid_argument("birkhoff_average: k must be positive");
  Rational sum(0);
  std::size_t y = x;
  for (std::size_t j = 0; j < k; ++j) {
    sum += f.values[y];
    y = sys.map[y];
  }
  return sum / static_cast<unsigned long>(k);
}

inline Rational maximal_function(const FiniteSystem& sys, const FiniteObservable& f,
                                 std::size_t x, std::size_t N) {
  if (N == 0) throw std::invalid_argument("maximal_function: N must be positive");
  Rational sum(0);
  Rational best;
  std::size_t y = x;
  for (std::size_t k = 1; k <= N; ++k) {
    sum += f.values[y];
    const Rational avg = sum / static_cast<unsigned long>(k);
    if (k == 1 || avg > best) best = avg;
    y = sys.map[y];
  }
  return best;
}

struct SupAverage {
  Rational value;
  bool attained = false;       // false iff the sup is the cycle-average limit only
  std::size_t preperiod = 0;   // t
  std::size_t period = 0;      // p
  Rational cycle_average;      // c
};

/// sup over all k of A_k f(x), exact, via the closed form max(f*_{t+p}, c).
inline SupAverage sup_average(const FiniteSystem& sys, const FiniteObservable& f,
                              std::size_t x) {
  const OrbitShape shape = orbit_shape(sys, x);
  const std::size_t t = shape.preperiod;
  const std::size_t p = shape.period;
  const std::vector<Rational> averages = birkhoff_averages(sys, f, x, t + p);
  Rational head = averages[0];
  for (const Rational& a : averages) {
    if (a > head) head = a;
  }
  Rational cycle_sum(0);
  for (std::size_t i = t; i < t + p; ++i) cycle_sum += f.values[shape.points[i]];
  const Rational cycle_avg = cycle_sum / static_cast<unsigned long>(p);
  SupAverage out;
  out.attained = head >= cycle_avg;
  out.value = out.attained ? head : cycle_avg;
  out.preperiod = t;
  out.period = p;
  out.cycle_average = cycle_avg;
  return out;
}

struct LimitStatistics {
  Rational limsup;
  Rational liminf;
  std::size_t preperiod = 0;
  std::size_t period = 0;
};

/// On a finite system A_k f(x) converges to the terminal-cycle average, so
/// limsup and liminf coincide and are exact.
inline LimitStatistics limit_statistics(const FiniteSystem& sys, const FiniteObservable& f,
                                        std::size_t x) {
  const OrbitShape shape = orbit_shape(sys, x);
  Rational cycle_sum(0);
  for (std::size_t i = shape.preperiod; i < shape.preperiod + shape.period; ++i) {
    cycle_sum += f.values[shape.points[i]];
  }
  const Rational c = cycle_sum / static_cast<unsigned long>(shape.period);
  return {c, c, shape.preperiod, shape.period};
}

/// limsup values at every point (the a.e. limit of A_k f).
inline std::vector<Rational> limsup_values(const FiniteSystem& sys, const FiniteObservable& f) {
  std::vector<Rational> out(sys.size());
  for (std::size_t x = 0; x < sys.size(); ++x) out[x] = limit_statistics(sys, f, x).limsup;
  return out;
}

namespace detail {

inline BigInt floor_div(const BigInt& a, const BigInt& b) {
  // b > 0; cpp_int division truncates toward zero.
  BigInt q = a / b;
  if (a % b != 0 && a < 0) --q;
  return q;
}

}  // namespace detail

/// Smallest window k with A_k f(x) > bound, or nullopt if no window ever
/// exceeds it. Within the first t+p windows this is a direct scan; beyond,
/// A_{t+qp+r} = (S_{t+r} + q P) / ((t+r) + q p) is monotone in q toward the
/// cycle average, so the first exceedance solves a linear inequality in q.
inline std::optional<std::uint64_t> first_window_exceeding(const FiniteSystem& sys,
                                                           const FiniteObservable& f,
                                                           std::size_t x,
                                                           const Rational& bound) {
  const OrbitShape shape = orbit_shape(sys, x);
  const std::size_t t = shape.preperiod;
  const std::size_t p = shape.period;
  Rational sum(0);
  std::vector<Rational> prefix;  // prefix[j] = sum of first j values, j = 0..t+p
  prefix.reserve(t + p + 1);
  prefix.push_back(sum);
  for (std::size_t j = 0; j < t + p; ++j) {
    sum += f.values[shape.points[j]];
    prefix.push_back(sum);
    if (sum > bound * static_cast<unsigned long>(j + 1)) {
      return static_cast<std::uint64_t>(j + 1);
    }
  }
  const Rational cycle_sum = prefix[t + p] - prefix[t];
  const Rational cycle_avg = cycle_sum / static_cast<unsigned long>(p);
  if (cycle_avg <= bound) return std::nullopt;

  // q (P - bound*p) > bound*(t+r) - S_{t+r}, with P - bound*p > 0.
  const Rational gap = cycle_sum - bound * static_cast<unsigned long>(p);
  std::optional<BigInt> best;
  for (std::size_t r = 0; r < p; ++r) {
    const Rational rhs = bound * static_cast<unsigned long>(t + r) - prefix[t + r];
    const Rational ratio = rhs / gap;
    BigInt q_min = detail::floor_div(numerator(ratio), denominator(ratio)) + 1;
    const BigInt q_low = (r == 0) ? 2 : 1;
    if (q_min < q_low) q_min = q_low;
    const BigInt k = BigInt(static_cast<unsigned long>(t)) +
                     q_min * static_cast<unsigned long>(p) + static_cast<unsigned long>(r);
    if (!best || k < *best) best = k;
  }
  return best->convert_to<std::uint64_t>();
}

// ---------------------------------------------------------------------------
// Level sets

/// Strict level set membership per point. window == nullopt means the
/// unbounded maximal function f*; that case is exact on finite systems only.
struct FiniteLevelSet {
  std::vector<bool> member;
  std::optional<std::uint64_t> window;
};

inline FiniteLevelSet level_set(const FiniteSystem& sys, const FiniteObservable& f,
                                const FiniteObservable& lam,
                                std::optional<std::uint64_t> window) {
  if (!is_invariant(sys, lam)) {
    throw std::invalid_argument("level_set: lambda is not invariant");
  }
  if (window && *window == 0) throw std::invalid_argument("level_set: window must be positive");
  FiniteLevelSet out;
  out.window = window;
  out.member.resize(sys.size());
  for (std::size_t x = 0; x < sys.size(); ++x) {
    const Rational value = window
                               ? maximal_function(sys, f, x, static_cast<std::size_t>(*window))
                               : sup_average(sys, f, x).value;
    out.member[x] = value > lam.values[x];
  }
  return out;
}

/// The unbounded level set computed as the increasing union of the windowed
/// sets: x is a member iff some finite window witnesses A_k f(x) > lambda(x).
/// Agrees with the closed-form route; both are kept and cross-checked.
inline FiniteLevelSet level_set_unbounded_by_union(const FiniteSystem& sys,
                                                   const FiniteObservable& f,
                                                   const FiniteObservable& lam) {
  if (!is_invariant(sys, lam)) {
    throw std::invalid_argument("level_set: lambda is not invariant");
  }
  FiniteLevelSet out;
  out.window = std::nullopt;
  out.member.resize(sys.size());
  for (std::size_t x = 0; x < sys.size(); ++x) {
    out.member[x] = first_window_exceeding(sys, f, x, lam.values[x]).has_value();
  }
  return out;
}

inline Rational measure(const FiniteSystem& sys, const FiniteLevelSet& set) {
  Rational total(0);
  for (std::size_t x = 0; x < sys.size(); ++x) {
    if (set.member[x]) total += sys.weights[x];
  }
  return total;
}

// ---------------------------------------------------------------------------
// Truncation and integration

/// phi_s = f restricted to {|f| <= s} (zero elsewhere).
inline FiniteObservable truncate(const FiniteObservable& f, const Rational& s) {
  if (s < 0) throw std::invalid_argument("truncate: s must be nonnegative");
  std::vector<Rational> values;
  values.reserve(f.values.size());
  for (const Rational& v : f.values) {
    values.push_back(abs(v) <= s ? v : Rational(0));
  }
  return FiniteObservable{std::move(values), std::min(s, f.sup_bound)};
}

inline IntervalObservable truncate(const IntervalObservable& f, double s) {
  if (s < 0) throw std::invalid_argument("truncate: s must be nonnegative");
  IntervalObservable out;
  out.name = f.name + "_truncated";
  out.sup_bound = std::min(s, f.sup_bound);
  auto fn = f.value;
  out.value = [fn, s](double x) {
    const double v = fn(x);
    return (v <= s && v >= -s) ? v : 0.0;
  };
  if (f.exact_value) {
    auto exact = f.exact_value;
    const Rational sr(s);  // double -> dyadic rational, exact
    out.exact_value = [exact, sr](const Rational& x) {
      const Rational v = exact(x);
      return abs(v) <= sr ? v : Rational(0);
    };
  }
  return out;
}

/// Exact integral of a pointwise expression, optionally over a level set.
template <class Fn>
inline Rational integrate_pointwise(const FiniteSystem& sys, Fn&& g,
                                    const FiniteLevelSet* restriction = nullptr) {
  if (restriction && restriction->member.size() != sys.size()) {
    throw std::invalid_argument("integrate: level set size mismatch");
  }
  Rational total(0);
  for (std::size_t x = 0; x < sys.size(); ++x) {
    if (restriction && !restriction->member[x]) continue;
    if (sys.weights[x] == 0) continue;
    total += g(x) * sys.weights[x];
  }
  return total;
}

inline Rational integrate(const FiniteSystem& sys, const FiniteObservable& f,
                          const FiniteLevelSet* restriction = nullptr) {
  if (f.values.size() != sys.size()) {
    throw std::invalid_argument("integrate: observable size mismatch");
  }
  return integrate_pointwise(sys, [&](std::size_t x) { return f.values[x]; }, restriction);
}

// ---------------------------------------------------------------------------
// Interval-system path (float64, plus exact helpers for the doubling map)

namespace detail {

template <class Fn>
inline void parallel_for(std::uint64_t total, unsigned threads, Fn&& fn) {
  if (threads <= 1 || total < 2) {
    for (std::uint64_t i = 0; i < total; ++i) fn(i);
    return;
  }
  const unsigned workers = std::min<std::uint64_t>(threads, total);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t lo = total * w / workers;
    const std::uint64_t hi = total * (w + 1) / workers;
    pool.emplace_back([lo, hi, &fn]() {
      for (std::uint64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (std::thread& th : pool) th.join();
}

}  // namespace detail

inline double birkhoff_average(const IntervalSystem& sys, const IntervalObservable& f,
                               double x, std::uint64_t k) {
  if (k == 0) throw std::invalid_argument("birkhoff_average: k must be positive");
  if (sys.exact_state()) {
    throw std::domain_error("birkhoff_average: doubling map requires rational state");
  }
  double sum = 0.0;
  double y = x;
  for (std::uint64_t j = 0; j < k; ++j) {
    sum += f.value(y);
    y = sys.apply(y);
  }
  return sum / static_cast<double>(k);
}

inline Rational birkhoff_average(const IntervalSystem& sys, const IntervalObservable& f,
                                 const Rational& x, std::uint64_t k) {
  if (k == 0) throw std::invalid_argument("birkhoff_average: k must be positive");
  if (!f.exact_value) {
    throw std::invalid_argument("birkhoff_average: observable '" + f.name +
                                "' has no exact evaluator");
  }
  Rational sum(0);
  Rational y = x;
  for (std::uint64_t j = 0; j < k; ++j) {
    sum += f.exact_value(y);
    y = sys.apply(y);
  }
  return sum / static_cast<unsigned long>(k);
}

inline double maximal_function(const IntervalSystem& sys, const IntervalObservable& f,
                               double x, std::uint64_t N) {
  if (N == 0) throw std::invalid_argument("maximal_function: N must be positive");
  if (sys.exact_state()) {
    throw std::domain_error("maximal_function: doubling map requires rational state");
  }
  double sum = 0.0;
  double y = x;
  double best = 0.0;
  for (std::uint64_t k = 1; k <= N; ++k) {
    sum += f.value(y);
    const double avg = sum / static_cast<double>(k);
    if (k == 1 || avg > best) best = avg;
    y = sys.apply(y);
  }
  return best;
}

inline Rational maximal_function(const IntervalSystem& sys, const IntervalObservable& f,
                                 const Rational& x, std::uint64_t N) {
  if (N == 0) throw std::invalid_argument("maximal_function: N must be positive");
  if (!f.exact_value) {
    throw std::invalid_argument("maximal_function: observable '" + f.name +
                                "' has no exact evaluator");
  }
  Rational sum(0);
  Rational y = x;
  Rational best;
  for (std::uint64_t k = 1; k <= N; ++k) {
    sum += f.exact_value(y);
    const Rational avg = sum / static_cast<unsigned long>(k);
    if (k == 1 || avg > best) best = avg;
    y = sys.apply(y);
  }
  return best;
}

/// Finite-horizon limsup/liminf proxies: running max/min of A_k f(x) over
/// the window k in [K/2, K]. The window and a downsampled trend are part of
/// the result so the estimate is auditable.
struct LimitEstimate {
  double limsup_proxy = 0.0;
  double liminf_proxy = 0.0;
  std::uint64_t horizon = 0;
  std::uint64_t window_lo = 0;
  std::uint64_t window_hi = 0;
  std::vector<std::pair<std::uint64_t, double>> trend;
};

inline LimitEstimate limit_statistics_estimate(const IntervalSystem& sys,
                                               const IntervalObservable& f, double x,
                                               std::uint64_t K) {
  if (K == 0) throw std::invalid_argument("limit_statistics_estimate: K must be positive");
  if (sys.exact_state()) {
    throw std::domain_error("limit_statistics_estimate: doubling map requires rational state");
  }
  LimitEstimate out;
  out.horizon = K;
  out.window_lo = std::max<std::uint64_t>(1, K / 2);
  out.window_hi = K;
  const std::uint64_t stride = std::max<std::uint64_t>(1, K / 64);
  double sum = 0.0;
  double y = x;
  bool first = true;
  for (std::uint64_t k = 1; k <= K; ++k) {
    sum += f.value(y);
    y = sys.apply(y);
    const double avg = sum / static_cast<double>(k);
    if (k >= out.window_lo) {
      if (first || avg > out.limsup_proxy) out.limsup_proxy = avg;
      if (first || avg < out.liminf_proxy) out.liminf_proxy = avg;
      first = false;
    }
    if (k % stride == 0 || k == K) out.trend.emplace_back(k, avg);
  }
  return out;
}

/// Exact variant for rational-state kinds (doubling).
struct ExactLimitEstimate {
  Rational limsup_proxy;
  Rational liminf_proxy;
  std::uint64_t horizon = 0;
  std::uint64_t window_lo = 0;
  std::uint64_t window_hi = 0;
};

inline ExactLimitEstimate limit_statistics_estimate(const IntervalSystem& sys,
                                                    const IntervalObservable& f,
                                                    const Rational& x, std::uint64_t K) {
  if (K == 0) throw std::invalid_argument("limit_statistics_estimate: K must be positive");
  if (!f.exact_value) {
    throw std::invalid_argument("limit_statistics_estimate: observable '" + f.name +
                                "' has no exact evaluator");
  }
  ExactLimitEstimate out;
  out.horizon = K;
  out.window_lo = std::max<std::uint64_t>(1, K / 2);
  out.window_hi = K;
  Rational sum(0);
  Rational y = x;
  bool first = true;
  for (std::uint64_t k = 1; k <= K; ++k) {
    sum += f.exact_value(y);
    y = sys.apply(y);
    const Rational avg = sum / static_cast<unsigned long>(k);
    if (k >= out.window_lo) {
      if (first || avg > out.limsup_proxy) out.limsup_proxy = avg;
      if (first || avg < out.liminf_proxy) out.liminf_proxy = avg;
      first = false;
    }
  }
  return out;
}

/// Level-set membership evaluated at the plan's sample points. The points
/// are stored so that restricted integration reuses exactly these samples.
struct SampledLevelSet {
  std::vector<double> points;
  std::vector<char> member;
  std::uint64_t window = 0;
};

inline SampledLevelSet level_set(const IntervalSystem& sys, const IntervalObservable& f,
                                 double lambda, std::uint64_t N, const SamplePlan& plan,
                                 unsigned threads = 1) {
  if (N == 0) throw std::invalid_argument("level_set: window must be positive");
  if (plan.count == 0) throw std::invalid_argument("level_set: empty sample plan");
  SampledLevelSet out;
  out.window = N;
  out.points.resize(plan.count);
  out.member.resize(plan.count);
  detail::parallel_for(plan.count, threads, [&](std::uint64_t i) {
    const double x = plan.point(i);
    out.points[i] = x;
    out.member[i] = maximal_function(sys, f, x, N) > lambda ? 1 : 0;
  });
  return out;
}

struct IntegralEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t members = 0;
};

namespace detail {

inline IntegralEstimate summarize_samples(const std::vector<double>& h, std::uint64_t members) {
  IntegralEstimate out;
  out.samples = h.size();
  out.members = members;
  double sum = 0.0;
  for (double v : h) sum += v;
  const double mean = sum / static_cast<double>(h.size());
  double sq = 0.0;
  for (double v : h) sq += (v - mean) * (v - mean);
  out.value = mean;
  if (h.size() > 1) {
    const double variance = sq / static_cast<double>(h.size() - 1);
    out.std_error = std::sqrt(variance / static_cast<double>(h.size()));
  }
  return out;
}

}  // namespace detail

/// Monte Carlo / grid estimate of the integral of g over [0, 1).
template <class Fn>
inline IntegralEstimate integrate_sampled(Fn&& g, const SamplePlan& plan, unsigned threads = 1) {
  if (plan.count == 0) throw std::invalid_argument("integrate_sampled: empty sample plan");
  std::vector<double> h(plan.count);
  detail::parallel_for(plan.count, threads, [&](std::uint64_t i) { h[i] = g(plan.point(i)); });
  return detail::summarize_samples(h, plan.count);
}

/// Integral of g over a sampled level set, reusing the set's own sample
/// points (integrand of g * chi_E against Lebesgue measure).
template <class Fn>
inline IntegralEstimate integrate_sampled(Fn&& g, const SampledLevelSet& set,
                                          unsigned threads = 1) {
  if (set.points.empty()) throw std::invalid_argument("integrate_sampled: empty level set");
  std::vector<double> h(set.points.size());
  std::uint64_t members = 0;
  detail::parallel_for(set.points.size(), threads, [&](std::uint64_t i) {
    h[i] = set.member[i] ? g(set.points[i]) : 0.0;
  });
  for (char m : set.member) members += m ? 1 : 0;
  return detail::summarize_samples(h, members);
}

}  // namespace ergo

#endif  // ERGO_AVERAGES_HPP
