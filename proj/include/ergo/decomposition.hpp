// Greedy decomposition of an orbit sum into zero-runs and positive-sum
// blocks, with a certified short tail.
//
// Fix x, a window bound N and a horizon m, and let
//   t_k = (f - lambda) * chi_{E_N} (T^k x),   k = 0..m-1.
// Scanning k upward: an index outside E_N extends a zero-run (t_k = 0);
// an index inside E_N starts a block whose length is the SMALLEST n <= N
// with A_n f(T^k x) > lambda (one exists, by membership). The raw sum of
// such a block is n (A_n - lambda) > 0, and replacing raw terms by their
// chi-modified versions can only increase it, so every block sum is
// strictly positive. A block that would overrun m is not emitted; the tail
// starts there and has length <= N - 1. Consequently
//   sum_{k<m} t_k >= tail sum >= -N (sup|f| + lambda^+(x)).
//
// Exact rational arithmetic on finite systems. On interval systems every
// sign decision must clear a guard band of 2^-40 per averaged term;
// anything closer is rejected (PrecisionError) rather than certified.

#ifndef ERGO_DECOMPOSITION_HPP
#define ERGO_DECOMPOSITION_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ergo/averages.hpp"
#include "ergo/finite_system.hpp"
#include "ergo/interval_system.hpp"
#include "ergo/observable.hpp"
#include "ergo/rational.hpp"

namespace ergo {

inline constexpr double kSignGuardBand = 0x1p-40;

class PrecisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SegmentKind { zero_run, block };

template <class Scalar>
struct Segment {
  SegmentKind kind = SegmentKind::zero_run;
  std::size_t start = 0;
  std::size_t length = 0;
  Scalar sum{};  // sum of t_k over the segment; 0 for zero-runs
};

template <class Scalar>
struct StringDecomposition {
  std::size_t horizon = 0;     // m
  std::uint64_t window = 0;    // N
  std::size_t tail_start = 0;  // j, with m - j <= N - 1
  Scalar lambda_value{};       // lambda(x); constant along the traced orbit
  std::vector<Segment<Scalar>> segments;
  std::vector<char> member;    // E_N membership flag per k < m
  std::vector<Scalar> terms;   // t_k per k < m

  Scalar tail_sum() const {
    Scalar sum{};
    for (std::size_t k = tail_start; k < horizon; ++k) sum += terms[k];
    return sum;
  }
  Scalar total_sum() const {
    Scalar sum{};
    for (const Scalar& t : terms) sum += t;
    return sum;
  }
};

using ExactDecomposition = StringDecomposition<Rational>;
using SampledDecomposition = StringDecomposition<double>;

namespace detail {

// Comparison policies for "block sum over n terms exceeds n*lambda".
struct ExactGreater {
  bool operator()(const Rational& lhs, const Rational& rhs, std::uint64_t /*terms*/) const {
    return lhs > rhs;
  }
};

struct GuardedGreater {
  bool operator()(double lhs, double rhs, std::uint64_t terms) const {
    const double band = kSignGuardBand * static_cast<double>(terms);
    if (lhs <= rhs + band && lhs >= rhs - band) {
      throw PrecisionError("sign determination within the float guard band (|delta| <= 2^-40)");
    }
    return lhs > rhs;
  }
};

// Greedy scan over precomputed observable values along the orbit.
// fvals must cover indices [0, m + N - 1) so every window fits.
template <class Scalar, class Greater>
StringDecomposition<Scalar> greedy_decompose(const std::vector<Scalar>& fvals,
                                             const Scalar& lambda, std::uint64_t N,
                                             std::size_t m, Greater greater) {
  StringDecomposition<Scalar> dec;
  dec.horizon = m;
  dec.window = N;
  dec.lambda_value = lambda;

  std::vector<Scalar> prefix(fvals.size() + 1);
  prefix[0] = Scalar{};
  for (std::size_t j = 0; j < fvals.size(); ++j) prefix[j + 1] = prefix[j] + fvals[j];

  // Smallest witness window per index (0 = not a member of E_N).
  std::vector<std::uint32_t> witness(m, 0);
  dec.member.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::uint64_t n = 1; n <= N; ++n) {
      const Scalar window_sum = prefix[k + n] - prefix[k];
      if (greater(window_sum, lambda * static_cast<Scalar>(n), n)) {
        witness[k] = static_cast<std::uint32_t>(n);
        break;
      }
    }
    dec.member[k] = witness[k] != 0;
  }

  dec.terms.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    dec.terms[k] = dec.member[k] ? Scalar(fvals[k] - lambda) : Scalar{};
  }

  std::size_t k = 0;
  dec.tail_start = m;
  while (k < m) {
    if (!dec.member[k]) {
      std::size_t end = k;
      while (end < m && !dec.member[end]) ++end;
      dec.segments.push_back({SegmentKind::zero_run, k, end - k, Scalar{}});
      k = end;
      continue;
    }
    const std::size_t n = witness[k];
    if (n == 0) throw std::logic_error("decompose: member index without a witness window");
    if (k + n > m) {
      dec.tail_start = k;  // no fitting block: the residual tail begins here
      break;
    }
    Scalar block_sum{};
    for (std::size_t i = k; i < k + n; ++i) block_sum += dec.terms[i];
    dec.segments.push_back({SegmentKind::block, k, n, block_sum});
    k += n;
  }
  return dec;
}

}  // namespace detail

/// Exact decomposition on a finite system. lambda must be invariant and, in
/// particular, constant along the traced orbit.
inline ExactDecomposition decompose(const FiniteSystem& sys, const FiniteObservable& f,
                                    const FiniteObservable& lam, std::size_t x,
                                    std::uint64_t N, std::size_t m) {
  if (N == 0) throw std::invalid_argument("decompose: N must be positive");
  if (m == 0) throw std::invalid_argument("decompose: m must be positive");
  if (!is_invariant(sys, lam)) {
    throw std::invalid_argument("decompose: lambda is not invariant");
  }
  const std::size_t span = m + static_cast<std::size_t>(N) - 1;
  const std::vector<std::size_t> points = orbit(sys, x, span);
  for (std::size_t k = 0; k < m; ++k) {
    if (lam.values[points[k]] != lam.values[x]) {
      throw std::invalid_argument("decompose: lambda is not constant along the orbit of " +
                                  std::to_string(x));
    }
  }
  std::vector<Rational> fvals;
  fvals.reserve(span);
  for (std::size_t p : points) fvals.push_back(f.values[p]);
  return detail::greedy_decompose(fvals, lam.values[x], N, m, detail::ExactGreater{});
}

/// Guard-banded decomposition on an interval system with constant lambda.
inline SampledDecomposition decompose(const IntervalSystem& sys, const IntervalObservable& f,
                                      double lambda, double x, std::uint64_t N, std::size_t m) {
  if (N == 0) throw std::invalid_argument("decompose: N must be positive");
  if (m == 0) throw std::invalid_argument("decompose: m must be positive");
  const std::size_t span = m + static_cast<std::size_t>(N) - 1;
  const std::vector<double> points = sys.orbit(x, span);
  std::vector<double> fvals;
  fvals.reserve(span);
  for (double p : points) fvals.push_back(f.value(p));
  return detail::greedy_decompose(fvals, lambda, N, m, detail::GuardedGreater{});
}

/// Exact decomposition on a rational-state interval system (doubling).
inline ExactDecomposition decompose(const IntervalSystem& sys, const IntervalObservable& f,
                                    const Rational& lambda, const Rational& x, std::uint64_t N,
                                    std::size_t m) {
  if (N == 0) throw std::invalid_argument("decompose: N must be positive");
  if (m == 0) throw std::invalid_argument("decompose: m must be positive");
  if (!f.exact_value) {
    throw std::invalid_argument("decompose: observable '" + f.name + "' has no exact evaluator");
  }
  const std::size_t span = m + static_cast<std::size_t>(N) - 1;
  const std::vector<Rational> points = sys.orbit(x, span);
  std::vector<Rational> fvals;
  fvals.reserve(span);
  for (const Rational& p : points) fvals.push_back(f.exact_value(p));
  return detail::greedy_decompose(fvals, lambda, N, m, detail::ExactGreater{});
}

// ---------------------------------------------------------------------------
// Certificates

struct CertificateResult {
  bool ok = true;
  std::string failure;
  std::optional<std::size_t> segment_index;
};

namespace detail {

template <class Scalar>
CertificateResult certify(const StringDecomposition<Scalar>& dec,
                          const std::vector<Scalar>& fvals, const Scalar& lambda,
                          const std::vector<char>& flags) {
  const std::size_t m = dec.horizon;
  const std::uint64_t N = dec.window;
  const auto fail = [](std::string why, std::optional<std::size_t> seg = std::nullopt) {
    return CertificateResult{false, std::move(why), seg};
  };

  if (dec.tail_start > m) return fail("tail start beyond horizon");
  if (m - dec.tail_start + 1 > N) {
    return fail("tail too long: length " + std::to_string(m - dec.tail_start) +
                " with window " + std::to_string(N));
  }
  if (dec.member.size() != m || dec.terms.size() != m) {
    return fail("stored flags/terms have the wrong length");
  }

  // Independent recomputation of flags and terms.
  for (std::size_t k = 0; k < m; ++k) {
    if (dec.member[k] != flags[k]) {
      return fail("membership flag mismatch at index " + std::to_string(k));
    }
    const Scalar expected = flags[k] ? Scalar(fvals[k] - lambda) : Scalar{};
    if (dec.terms[k] != expected) {
      return fail("term value mismatch at index " + std::to_string(k));
    }
  }

  // Segments tile [0, tail_start) in order.
  std::size_t cursor = 0;
  for (std::size_t s = 0; s < dec.segments.size(); ++s) {
    const Segment<Scalar>& seg = dec.segments[s];
    if (seg.start != cursor || seg.length == 0) {
      return fail("segments do not tile [0, j)", s);
    }
    cursor += seg.length;
    if (cursor > dec.tail_start) return fail("segment overruns the tail", s);

    if (seg.kind == SegmentKind::zero_run) {
      if (seg.sum != Scalar{}) return fail("zero-run carries a nonzero sum", s);
      for (std::size_t k = seg.start; k < seg.start + seg.length; ++k) {
        if (flags[k]) return fail("zero-run contains a member index", s);
      }
    } else {
      if (seg.length > N) return fail("block longer than the window", s);
      if (!flags[seg.start]) return fail("block starts outside the level set", s);
      Scalar chi_sum{};
      Scalar raw_sum{};
      for (std::size_t k = seg.start; k < seg.start + seg.length; ++k) {
        chi_sum += flags[k] ? Scalar(fvals[k] - lambda) : Scalar{};
        raw_sum += fvals[k] - lambda;
      }
      if (chi_sum != seg.sum) return fail("block sum mismatch", s);
      if (!(seg.sum > Scalar{})) return fail("block sum not positive", s);
      // The stronger fact behind the block: its raw window sum is already
      // positive, and the chi-modified sum dominates it.
      if (!(raw_sum > Scalar{})) return fail("raw block sum not positive", s);
      if (chi_sum < raw_sum) return fail("chi-modified sum below raw sum", s);
      // Minimality of the witness window.
      Scalar head{};
      for (std::size_t n = 1; n < seg.length; ++n) {
        head += fvals[seg.start + n - 1];
        if (head > lambda * static_cast<Scalar>(n)) {
          return fail("block is not the smallest witness window", s);
        }
      }
    }
  }
  if (cursor != dec.tail_start) {
    return fail("segments stop short of the tail at index " + std::to_string(cursor));
  }

  // The tail must start at a member index whose smallest witness overruns m
  // (otherwise the scan would have continued), unless the tail is empty.
  if (dec.tail_start < m) {
    if (!flags[dec.tail_start]) return fail("tail starts at a non-member index");
    Scalar head{};
    for (std::size_t n = 1; dec.tail_start + n <= m; ++n) {
      head += fvals[dec.tail_start + n - 1];
      if (n <= N && head > lambda * static_cast<Scalar>(n)) {
        return fail("tail starts where a block still fits");
      }
    }
  }

  // Conservation: segment sums plus tail sum equal the full sum of terms.
  // Accumulated in index order on both sides so the float path compares
  // bit-identical sums; exact equality either way.
  Scalar walked{};
  for (const Segment<Scalar>& seg : dec.segments) {
    Scalar seg_sum{};
    for (std::size_t k = seg.start; k < seg.start + seg.length; ++k) {
      seg_sum += dec.terms[k];
      walked += dec.terms[k];
    }
    if (seg.kind == SegmentKind::block && seg_sum != seg.sum) {
      return fail("segment sums plus tail do not reproduce the total");
    }
  }
  for (std::size_t k = dec.tail_start; k < m; ++k) walked += dec.terms[k];
  if (walked != dec.total_sum()) {
    return fail("segment sums plus tail do not reproduce the total");
  }
  return {};
}

}  // namespace detail

/// Recomputes every term of an exact decomposition by an independent route
/// (per-point maximal functions) and checks all structural invariants.
inline CertificateResult verify_decomposition(const ExactDecomposition& dec,
                                              const FiniteSystem& sys,
                                              const FiniteObservable& f,
                                              const FiniteObservable& lam, std::size_t x) {
  if (!is_invariant(sys, lam)) {
    return {false, "lambda is not invariant", std::nullopt};
  }
  const std::vector<std::size_t> points = orbit(sys, x, dec.horizon);
  for (std::size_t k = 0; k < dec.horizon; ++k) {
    if (lam.values[points[k]] != lam.values[x]) {
      return {false, "lambda varies along the orbit", std::nullopt};
    }
  }
  if (dec.lambda_value != lam.values[x]) {
    return {false, "stored lambda differs from lambda(x)", std::nullopt};
  }
  std::vector<Rational> fvals;
  fvals.reserve(dec.horizon);
  std::vector<char> flags(dec.horizon);
  for (std::size_t k = 0; k < dec.horizon; ++k) {
    fvals.push_back(f.values[points[k]]);
    const Rational fstar =
        maximal_function(sys, f, points[k], static_cast<std::size_t>(dec.window));
    flags[k] = fstar > lam.values[x] ? 1 : 0;
  }
  return detail::certify(dec, fvals, dec.lambda_value, flags);
}

/// Float counterpart for interval systems (recomputation uses the same
/// deterministic arithmetic, so comparisons are exact equalities).
inline CertificateResult verify_decomposition(const SampledDecomposition& dec,
                                              const IntervalSystem& sys,
                                              const IntervalObservable& f, double lambda,
                                              double x) {
  if (dec.lambda_value != lambda) {
    return {false, "stored lambda differs from the supplied one", std::nullopt};
  }
  const std::vector<double> points = sys.orbit(x, dec.horizon);
  std::vector<double> fvals;
  fvals.reserve(dec.horizon);
  std::vector<char> flags(dec.horizon);
  for (std::size_t k = 0; k < dec.horizon; ++k) {
    fvals.push_back(f.value(points[k]));
    const double fstar = maximal_function(sys, f, points[k], dec.window);
    flags[k] = fstar > lambda ? 1 : 0;
  }
  return detail::certify(dec, fvals, lambda, flags);
}

// ---------------------------------------------------------------------------
// Tail bound

template <class Scalar>
struct TailBound {
  bool ok = false;
  Scalar tail_sum{};
  Scalar bound{};      // -N (sup|f| + lambda^+(x))
  Scalar total_sum{};  // sum over all m terms
};

/// tail sum >= -N (B + lambda^+(x)), chained under the full sum.
inline TailBound<Rational> tail_bound_check(const ExactDecomposition& dec,
                                            const Rational& sup_bound) {
  TailBound<Rational> out;
  out.tail_sum = dec.tail_sum();
  out.total_sum = dec.total_sum();
  const Rational lambda_plus = positive_part(dec.lambda_value);
  out.bound = -Rational(dec.window) * (sup_bound + lambda_plus);
  out.ok = out.tail_sum >= out.bound && out.total_sum >= out.tail_sum;
  return out;
}

inline TailBound<Rational> tail_bound_check(const ExactDecomposition& dec,
                                            const FiniteObservable& f) {
  return tail_bound_check(dec, f.sup_bound);
}

inline TailBound<double> tail_bound_check(const SampledDecomposition& dec,
                                          const IntervalObservable& f) {
  TailBound<double> out;
  out.tail_sum = dec.tail_sum();
  out.total_sum = dec.total_sum();
  const double lambda_plus = dec.lambda_value > 0 ? dec.lambda_value : 0.0;
  out.bound = -static_cast<double>(dec.window) * (f.sup_bound + lambda_plus);
  out.ok = out.tail_sum >= out.bound && out.total_sum >= out.tail_sum;
  return out;
}

// ---------------------------------------------------------------------------
// The integrated form of the estimate

struct InequalityTraceRow {
  std::size_t horizon_m = 0;
  Rational lower_bound;  // -(N/m) (B + ||lambda^+||_1)
  Rational integral;     // exact integral of (f - lambda) over E_N
};

/// For each m in the schedule, the lower bound -(N/m)(B + ||lambda^+||_1)
/// against the fixed exact integral over E_N: the bound decays to zero while
/// the integral stays put, which pins the integral at >= 0.
inline std::vector<InequalityTraceRow> integrated_inequality_trace(
    const FiniteSystem& sys, const FiniteObservable& f, const FiniteObservable& lam,
    std::uint64_t N, const std::vector<std::size_t>& m_schedule) {
  const FiniteLevelSet set = level_set(sys, f, lam, N);
  const Rational integral = integrate_pointwise(
      sys, [&](std::size_t p) { return f.values[p] - lam.values[p]; }, &set);
  const Rational lambda_plus_l1 =
      integrate_pointwise(sys, [&](std::size_t p) { return positive_part(lam.values[p]); });
  std::vector<InequalityTraceRow> rows;
  rows.reserve(m_schedule.size());
  for (std::size_t m : m_schedule) {
    if (m == 0) throw std::invalid_argument("integrated_inequality_trace: m must be positive");
    InequalityTraceRow row;
    row.horizon_m = m;
    row.lower_bound = -(Rational(N) * (f.sup_bound + lambda_plus_l1)) /
                      Rational(static_cast<unsigned long>(m));
    row.integral = integral;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ergo

#endif  // ERGO_DECOMPOSITION_HPP
