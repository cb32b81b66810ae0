// Executable checks for the maximal inequality and the a.e. convergence of
// Birkhoff averages, plus the auxiliary claims used on the way there.
//
// Finite systems: every verdict is an exact rational comparison with zero
// tolerance. Interval systems: verdicts are statistical, and each report
// states the confidence rule it used. Every report carries enough
// parameters (seeds included) to reproduce its numbers bit for bit.

#ifndef ERGO_VERIFY_HPP
#define ERGO_VERIFY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ergo/averages.hpp"
#include "ergo/decomposition.hpp"
#include "ergo/finite_system.hpp"
#include "ergo/interval_system.hpp"
#include "ergo/observable.hpp"
#include "ergo/rational.hpp"
#include "ergo/rng.hpp"

namespace ergo {

struct VerificationReport {
  std::string check;
  std::string system;
  std::string mode;                  // "exact" | "statistical"
  std::string status = "ok";         // | "vacuous-infinite"
  bool pass = false;
  std::map<std::string, std::string> params;
  std::optional<Rational> exact_value;
  std::optional<double> estimate;
  std::optional<double> std_error;
  std::vector<std::map<std::string, std::string>> rows;
  std::string detail;
};

inline std::string describe(const FiniteSystem& sys) {
  return "finite(n=" + std::to_string(sys.size()) + ")";
}

inline std::string describe(const IntervalSystem& sys) {
  std::ostringstream out;
  out << kind_name(sys.kind());
  if (sys.kind() == IntervalKind::rotation) {
    out.precision(17);
    out << "(alpha=" << sys.alpha() << ")";
  } else if (sys.kind() == IntervalKind::interval_exchange) {
    out << "(k=" << sys.lengths().size() << ")";
  }
  return out.str();
}

inline std::string format_window(std::optional<std::uint64_t> window) {
  return window ? std::to_string(*window) : std::string("inf");
}

// ---------------------------------------------------------------------------
// The maximal inequality, exact form

/// Exact value of the integral of (f - lambda) over {f*_N > lambda}
/// (or over {f* > lambda} when window is unbounded); pass iff >= 0.
inline VerificationReport check_maximal_inequality(const FiniteSystem& sys,
                                                   const FiniteObservable& f,
                                                   const FiniteObservable& lam,
                                                   std::optional<std::uint64_t> window) {
  VerificationReport rep;
  rep.check = "maximal_inequality";
  rep.system = describe(sys);
  rep.mode = "exact";
  rep.params["N"] = format_window(window);
  const FiniteLevelSet set = level_set(sys, f, lam, window);
  const Rational value = integrate_pointwise(
      sys, [&](std::size_t x) { return f.values[x] - lam.values[x]; }, &set);
  rep.exact_value = value;
  rep.params["level_set_measure"] = format_rational(measure(sys, set));
  rep.pass = value >= 0;
  return rep;
}

// ---------------------------------------------------------------------------
// The maximal inequality, Monte Carlo form on interval systems

/// Sampled estimate of the integral of (f - lambda) over {f*_N > lambda}.
/// lambda is a constant (on an ergodic interval system any invariant
/// function is a.e. constant). Pass rule: estimate >= -3 * stderr; the true
/// value is >= 0, so a failure flags an implementation or sampling bug.
/// A lambda declared non-integrable short-circuits to VACUOUS-INFINITE.
inline VerificationReport check_maximal_inequality_mc(const IntervalSystem& sys,
                                                      const IntervalObservable& f,
                                                      double lambda, std::uint64_t N,
                                                      const SamplePlan& plan,
                                                      bool lambda_pos_part_integrable = true,
                                                      unsigned threads = 1) {
  VerificationReport rep;
  rep.check = "maximal_inequality_mc";
  rep.system = describe(sys);
  rep.mode = "statistical";
  rep.params["N"] = std::to_string(N);
  rep.params["lambda"] = to_decimal_string(Rational(lambda));
  rep.params["samples"] = std::to_string(plan.count);
  rep.params["seed"] = std::to_string(plan.seed);
  rep.params["plan"] = plan.mode == SamplePlan::Mode::grid ? "grid" : "pseudorandom";
  rep.params["rule"] = "pass iff estimate >= -3*stderr (one-sided ~99.7%)";
  if (!lambda_pos_part_integrable) {
    // Non-integrable positive part: the integral is formally +infinity,
    // which satisfies the inequality without any arithmetic.
    rep.status = "vacuous-infinite";
    rep.pass = true;
    rep.detail = "lambda declared non-integrable; inequality holds vacuously";
    return rep;
  }
  const SampledLevelSet set = level_set(sys, f, lambda, N, plan, threads);
  const IntegralEstimate est =
      integrate_sampled([&](double x) { return f.value(x) - lambda; }, set, threads);
  rep.estimate = est.value;
  rep.std_error = est.std_error;
  rep.params["member_fraction"] =
      to_decimal_string(Rational(est.members) / Rational(est.samples), 6);
  rep.pass = est.value >= -3.0 * est.std_error;
  return rep;
}

// ---------------------------------------------------------------------------
// Property fuzzing of the maximal inequality

enum class InjectedFault { none, level_set_ge, unnormalized_weights };

struct FuzzOptions {
  std::size_t trials = 0;
  std::size_t size_bound = 64;
  std::uint64_t seed = 0;
  InjectedFault fault = InjectedFault::none;
};

/// Random (system, f, lambda, N) tuples through check_maximal_inequality.
/// Each trial derives its RNG stream from (seed, trial index), so results
/// are independent of execution order. Any failure embeds the full instance
/// for replay.
inline VerificationReport fuzz_maximal(const FuzzOptions& opt) {
  VerificationReport rep;
  rep.check = "fuzz_maximal";
  rep.mode = "exact";
  rep.params["trials"] = std::to_string(opt.trials);
  rep.params["size_bound"] = std::to_string(opt.size_bound);
  rep.params["seed"] = std::to_string(opt.seed);
  rep.params["fault"] = opt.fault == InjectedFault::none ? "none"
                        : opt.fault == InjectedFault::level_set_ge ? "level_set_ge"
                                                                   : "unnormalized_weights";
  const Rng master(opt.seed);
  std::size_t passed = 0;
  std::size_t rejected = 0;
  for (std::size_t trial = 0; trial < opt.trials; ++trial) {
    Rng rng = master.substream(trial);
    const std::size_t n = 1 + static_cast<std::size_t>(rng.below(opt.size_bound));
    FiniteSystem sys = make_random_preserving(n, rng.next());
    const FiniteObservable f = random_observable(sys, rng.next());
    const FiniteObservable lam = rng.coin() ? make_invariant(sys, rng.next())
                                            : [&]() {
                                                const auto den =
                                                    static_cast<std::int64_t>(1 + rng.below(8));
                                                const std::int64_t num =
                                                    rng.range(-9 * den, 9 * den);
                                                return constant_observable(
                                                    n, Rational(static_cast<long long>(num),
                                                                static_cast<long long>(den)));
                                              }();
    const std::uint64_t pick = rng.below(9);
    const std::optional<std::uint64_t> window =
        pick < 8 ? std::optional<std::uint64_t>(pick + 1) : std::nullopt;

    if (opt.fault == InjectedFault::unnormalized_weights) {
      sys.weights[0] += Rational(1, 7);
      if (!validate(sys).ok) {
        ++rejected;  // the validator refuses the instance before any check
        continue;
      }
      rep.pass = false;
      rep.detail = "unnormalized weights slipped past the validator at trial " +
                   std::to_string(trial);
      return rep;
    }
    if (!validate(sys).ok) {
      rep.pass = false;
      rep.detail = "generator produced an invalid system at trial " + std::to_string(trial);
      return rep;
    }

    bool ok;
    Rational value;
    if (opt.fault == InjectedFault::level_set_ge) {
      // Deliberately relaxed membership (>= instead of >). The inequality
      // still holds on the closed level set, so this must keep passing.
      FiniteLevelSet set;
      set.window = window;
      set.member.resize(n);
      for (std::size_t x = 0; x < n; ++x) {
        const Rational fstar = window
                                   ? maximal_function(sys, f, x, static_cast<std::size_t>(*window))
                                   : sup_average(sys, f, x).value;
        set.member[x] = fstar >= lam.values[x];
      }
      value = integrate_pointwise(
          sys, [&](std::size_t x) { return f.values[x] - lam.values[x]; }, &set);
      ok = value >= 0;
    } else {
      const VerificationReport one = check_maximal_inequality(sys, f, lam, window);
      ok = one.pass;
      value = *one.exact_value;
    }

    if (ok) {
      ++passed;
    } else {
      std::map<std::string, std::string> row;
      row["trial"] = std::to_string(trial);
      row["n"] = std::to_string(n);
      row["N"] = format_window(window);
      row["value"] = format_rational(value);
      std::ostringstream weights, map_str, f_str, lam_str;
      for (std::size_t i = 0; i < n; ++i) {
        if (i) {
          weights << ",";
          map_str << ",";
          f_str << ",";
          lam_str << ",";
        }
        weights << format_rational(sys.weights[i]);
        map_str << sys.map[i];
        f_str << format_rational(f.values[i]);
        lam_str << format_rational(lam.values[i]);
      }
      row["weights"] = weights.str();
      row["map"] = map_str.str();
      row["f"] = f_str.str();
      row["lambda"] = lam_str.str();
      rep.rows.push_back(std::move(row));
    }
  }
  rep.system = "finite(fuzzed)";
  rep.params["passed"] = std::to_string(passed);
  rep.params["rejected"] = std::to_string(rejected);
  rep.pass = rep.rows.empty() && rep.detail.empty();
  return rep;
}

// ---------------------------------------------------------------------------
// Convergence of averages and its consequences

/// Integral of the limit average against the integral of f. On a finite
/// system the two are exactly equal (weights are constant along cycles and
/// transient points carry no mass), which is asserted on top of <=.
inline VerificationReport check_ergodic_limit(const FiniteSystem& sys,
                                              const FiniteObservable& f) {
  VerificationReport rep;
  rep.check = "ergodic_limit";
  rep.system = describe(sys);
  rep.mode = "exact";
  const std::vector<Rational> abar = limsup_values(sys, f);
  const Rational integral_abar =
      integrate_pointwise(sys, [&](std::size_t x) { return abar[x]; });
  const Rational integral_f = integrate(sys, f);
  rep.params["integral_limit"] = format_rational(integral_abar);
  rep.params["integral_f"] = format_rational(integral_f);
  rep.exact_value = integral_f - integral_abar;
  rep.pass = integral_abar <= integral_f && integral_abar == integral_f;
  if (!rep.pass) rep.detail = "integral of the limit average differs from the integral of f";
  return rep;
}

/// liminf A_k f = -limsup A_k(-f) at every positive-weight point, and the
/// two limits coincide (the limit exists).
inline VerificationReport check_duality(const FiniteSystem& sys, const FiniteObservable& f) {
  VerificationReport rep;
  rep.check = "duality";
  rep.system = describe(sys);
  rep.mode = "exact";
  const FiniteObservable neg = negated(f);
  rep.pass = true;
  for (std::size_t x = 0; x < sys.size(); ++x) {
    if (sys.weights[x] == 0) continue;
    const LimitStatistics stats = limit_statistics(sys, f, x);
    const LimitStatistics neg_stats = limit_statistics(sys, neg, x);
    if (stats.liminf != -neg_stats.limsup || stats.limsup != stats.liminf) {
      rep.pass = false;
      rep.detail = "duality fails at point " + std::to_string(x);
      break;
    }
  }
  return rep;
}

/// The integrability device: lambda = min(limit of A_k f^+, n) - 1/n is
/// invariant, its level set {(f^+)* > lambda} is everything, and the
/// integral of f^+ dominates the integral of lambda, which climbs to the
/// integral of the limit as n grows.
inline VerificationReport check_capped_limit_lambda(const FiniteSystem& sys,
                                                 const FiniteObservable& f, unsigned n) {
  if (n == 0) throw std::invalid_argument("check_capped_limit_lambda: n must be positive");
  VerificationReport rep;
  rep.check = "capped_limit_lambda";
  rep.system = describe(sys);
  rep.mode = "exact";
  rep.params["n"] = std::to_string(n);

  const FiniteObservable fplus = positive_part(f);
  const std::vector<Rational> abar = limsup_values(sys, fplus);
  Rational abar_max(0);
  for (std::size_t x = 0; x < sys.size(); ++x) {
    if (sys.weights[x] > 0 && abar[x] > abar_max) abar_max = abar[x];
  }
  const Rational integral_abar = integrate_pointwise(sys, [&](std::size_t x) { return abar[x]; });
  const Rational integral_fplus = integrate(sys, fplus);
  rep.params["integral_fplus"] = format_rational(integral_fplus);
  rep.params["integral_limit_fplus"] = format_rational(integral_abar);

  // (f^+)* is independent of the sweep; evaluate it once per point.
  std::vector<Rational> sup_plus(sys.size());
  for (std::size_t x = 0; x < sys.size(); ++x) sup_plus[x] = sup_average(sys, fplus, x).value;

  rep.pass = true;
  std::optional<Rational> previous;
  for (unsigned k = 1; k <= n; ++k) {
    std::vector<Rational> lam_values(sys.size());
    for (std::size_t x = 0; x < sys.size(); ++x) {
      lam_values[x] = std::min(abar[x], Rational(k)) - Rational(1, k);
    }
    const FiniteObservable lam = make_observable(std::move(lam_values));
    std::map<std::string, std::string> row;
    row["n"] = std::to_string(k);

    const bool invariant = is_invariant(sys, lam);
    bool covers = true;
    FiniteLevelSet set;
    set.window = std::nullopt;
    set.member.resize(sys.size());
    for (std::size_t x = 0; x < sys.size(); ++x) {
      set.member[x] = sup_plus[x] > lam.values[x];
      if (sys.weights[x] > 0 && !set.member[x]) covers = false;
    }
    const Rational integral_lam = integrate(sys, lam);
    row["integral_lambda"] = format_rational(integral_lam);
    const bool dominated = integral_fplus >= integral_lam;
    const bool monotone = !previous || integral_lam >= *previous;
    // Once min(limit, k) saturates, the trace sits exactly 1/k below its target.
    const bool saturated_exact =
        Rational(k) < abar_max || integral_lam + Rational(1, k) == integral_abar;
    row["saturated"] = Rational(k) >= abar_max ? "yes" : "no";
    if (!(invariant && covers && dominated && monotone && saturated_exact)) {
      rep.pass = false;
      if (rep.detail.empty()) {
        rep.detail = "failure at n=" + std::to_string(k) + ":" +
                     (invariant ? "" : " lambda-not-invariant") +
                     (covers ? "" : " level-set-not-full") +
                     (dominated ? "" : " integral-f+-below-lambda") +
                     (monotone ? "" : " integral-lambda-decreased") +
                     (saturated_exact ? "" : " saturation-mismatch");
      }
    }
    previous = integral_lam;
    rep.rows.push_back(std::move(row));
  }
  rep.exact_value = integral_fplus - *previous;
  return rep;
}

/// The concluding application: lambda = (limit of A_k f) - epsilon. Its
/// unbounded level set is everything, and the integral of f sits exactly
/// epsilon above the integral of lambda.
inline VerificationReport check_limit_epsilon_gap(const FiniteSystem& sys,
                                                  const FiniteObservable& f,
                                                  const Rational& epsilon) {
  if (epsilon <= 0) throw std::invalid_argument("check_limit_epsilon_gap: epsilon must be > 0");
  VerificationReport rep;
  rep.check = "limit_epsilon_gap";
  rep.system = describe(sys);
  rep.mode = "exact";
  rep.params["epsilon"] = format_rational(epsilon);

  const std::vector<Rational> abar = limsup_values(sys, f);
  std::vector<Rational> lam_values(sys.size());
  for (std::size_t x = 0; x < sys.size(); ++x) lam_values[x] = abar[x] - epsilon;
  const FiniteObservable lam = make_observable(std::move(lam_values));

  const bool invariant = is_invariant(sys, lam);
  const FiniteLevelSet set = level_set(sys, f, lam, std::nullopt);
  bool covers = true;
  for (std::size_t x = 0; x < sys.size(); ++x) {
    if (sys.weights[x] > 0 && !set.member[x]) covers = false;
  }
  const Rational integral_f = integrate(sys, f);
  const Rational integral_lam = integrate(sys, lam);
  const Rational integral_abar = integrate_pointwise(sys, [&](std::size_t x) { return abar[x]; });
  rep.params["integral_f"] = format_rational(integral_f);
  rep.params["integral_lambda"] = format_rational(integral_lam);
  rep.exact_value = integral_f - integral_lam;
  rep.pass = invariant && covers && integral_f >= integral_lam &&
             integral_lam == integral_abar - epsilon;
  if (!rep.pass) {
    rep.detail = std::string("failed:") + (invariant ? "" : " lambda-not-invariant") +
                 (covers ? "" : " level-set-not-full") +
                 (integral_f >= integral_lam ? "" : " integral-f-below-lambda") +
                 (integral_lam == integral_abar - epsilon ? "" : " epsilon-gap-mismatch");
  }
  return rep;
}

/// Truncation sweep phi_s = f restricted to {|f| <= s}. For each s the
/// report carries the level-set symmetric difference measure, the exact L1
/// distance of the windowed maximal functions, and the integral of
/// (phi_s - lambda) over the truncated level set. Asserts: every integral
/// is >= 0, both distance columns are nonincreasing along the schedule, and
/// all three quantities reach their limits exactly once s >= max |f|.
inline VerificationReport check_truncation(const FiniteSystem& sys, const FiniteObservable& f,
                                           const FiniteObservable& lam, std::uint64_t N,
                                           const std::vector<Rational>& s_schedule) {
  VerificationReport rep;
  rep.check = "truncation";
  rep.system = describe(sys);
  rep.mode = "exact";
  rep.params["N"] = std::to_string(N);
  for (std::size_t i = 1; i < s_schedule.size(); ++i) {
    if (s_schedule[i] < s_schedule[i - 1]) {
      throw std::invalid_argument("check_truncation: s_schedule must be nondecreasing");
    }
  }

  Rational max_abs(0);
  for (const Rational& v : f.values) {
    if (abs(v) > max_abs) max_abs = abs(v);
  }
  rep.params["max_abs_f"] = format_rational(max_abs);

  std::vector<Rational> fstar(sys.size());
  for (std::size_t x = 0; x < sys.size(); ++x) {
    fstar[x] = maximal_function(sys, f, x, static_cast<std::size_t>(N));
  }
  const FiniteLevelSet base_set = level_set(sys, f, lam, N);
  const Rational base_integral = integrate_pointwise(
      sys, [&](std::size_t x) { return f.values[x] - lam.values[x]; }, &base_set);

  rep.pass = true;
  std::optional<Rational> prev_symdiff;
  std::optional<Rational> prev_l1;
  for (const Rational& s : s_schedule) {
    const FiniteObservable phi = truncate(f, s);
    const FiniteLevelSet trunc_set = level_set(sys, phi, lam, N);
    Rational symdiff(0);
    Rational l1(0);
    for (std::size_t x = 0; x < sys.size(); ++x) {
      if (trunc_set.member[x] != base_set.member[x]) symdiff += sys.weights[x];
      const Rational phistar = maximal_function(sys, phi, x, static_cast<std::size_t>(N));
      l1 += abs(phistar - fstar[x]) * sys.weights[x];
    }
    const Rational integral = integrate_pointwise(
        sys, [&](std::size_t x) { return phi.values[x] - lam.values[x]; }, &trunc_set);

    std::map<std::string, std::string> row;
    row["s"] = format_rational(s);
    row["symmetric_difference"] = format_rational(symdiff);
    row["l1_distance"] = format_rational(l1);
    row["integral"] = format_rational(integral);
    rep.rows.push_back(std::move(row));

    const bool nonneg = integral >= 0;
    const bool symdiff_monotone = !prev_symdiff || symdiff <= *prev_symdiff;
    const bool l1_monotone = !prev_l1 || l1 <= *prev_l1;
    const bool at_limit =
        s < max_abs || (symdiff == 0 && l1 == 0 && integral == base_integral);
    if (!(nonneg && symdiff_monotone && l1_monotone && at_limit)) {
      rep.pass = false;
      if (rep.detail.empty()) {
        rep.detail = "failure at s=" + format_rational(s) + ":" +
                     (nonneg ? "" : " integral-negative") +
                     (symdiff_monotone ? "" : " symdiff-increased") +
                     (l1_monotone ? "" : " l1-increased") +
                     (at_limit ? "" : " limit-not-reached");
      }
    }
    prev_symdiff = symdiff;
    prev_l1 = l1;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Classical interval examples

/// Equidistribution of an irrational rotation, f = cos(2 pi x). The orbit
/// average satisfies |A_K f(x0)| <= 1/(K sin(pi alpha)) exactly (geometric
/// sum), so the float check allows only the accumulated rounding drift of K
/// steps on top (~2 pi K ulp, about 1e-9 at K = 1e6).
inline VerificationReport check_rotation_equidistribution(double alpha, double x0,
                                                          std::uint64_t K) {
  VerificationReport rep;
  rep.check = "rotation_equidistribution";
  rep.mode = "statistical";
  const IntervalSystem sys = IntervalSystem::rotation(alpha);
  rep.system = describe(sys);
  const IntervalObservable f = named_observable("cos2pi");
  rep.params["K"] = std::to_string(K);
  rep.params["x0"] = to_decimal_string(Rational(x0), 17);
  const double pi = 3.14159265358979323846;
  const double bound = 1.0 / (static_cast<double>(K) * std::sin(pi * alpha));
  const double slack = 2.0 * pi * static_cast<double>(K) * 2.220446049250313e-16;
  const double average = birkhoff_average(sys, f, x0, K);
  rep.estimate = average;
  rep.params["bound"] = to_decimal_string(Rational(bound), 6);
  rep.params["slack"] = to_decimal_string(Rational(slack), 6);
  rep.params["rule"] = "pass iff |A_K f| <= 1/(K sin(pi alpha)) + drift slack";
  rep.pass = std::fabs(average) <= bound + slack;
  return rep;
}

/// Sampled check that an interval map preserves Lebesgue measure: for a
/// family of random subintervals A, the sample mean of chi_A(T x) matches
/// the length of A within 4 standard errors. A single float application of
/// the doubling map is exact, so this check covers every kind.
inline VerificationReport check_measure_preservation_mc(const IntervalSystem& sys,
                                                        const SamplePlan& plan,
                                                        std::size_t n_intervals,
                                                        std::uint64_t seed) {
  VerificationReport rep;
  rep.check = "measure_preservation_mc";
  rep.system = describe(sys);
  rep.mode = "statistical";
  rep.params["samples"] = std::to_string(plan.count);
  rep.params["intervals"] = std::to_string(n_intervals);
  rep.params["seed"] = std::to_string(seed);
  rep.params["rule"] = "pass iff |mean chi_A(Tx) - |A|| <= 4*stderr for every A";
  rep.pass = true;
  const Rng master(seed);
  for (std::size_t j = 0; j < n_intervals; ++j) {
    Rng rng = master.substream(j);
    double a = rng.unit();
    double b = rng.unit();
    if (a > b) std::swap(a, b);
    const IntegralEstimate est = integrate_sampled(
        [&](double x) {
          const double y = sys.apply(x);
          return (y >= a && y < b) ? 1.0 : 0.0;
        },
        plan);
    const double err = std::fabs(est.value - (b - a));
    const double allowed = 4.0 * est.std_error + 1e-12;
    std::map<std::string, std::string> row;
    row["a"] = to_decimal_string(Rational(a), 6);
    row["b"] = to_decimal_string(Rational(b), 6);
    row["estimate"] = to_decimal_string(Rational(est.value), 6);
    row["stderr"] = to_decimal_string(Rational(est.std_error), 6);
    rep.rows.push_back(std::move(row));
    if (err > allowed) {
      rep.pass = false;
      rep.detail = "preimage measure off for interval [" + std::to_string(a) + ", " +
                   std::to_string(b) + ")";
    }
  }
  return rep;
}

}  // namespace ergo

#endif  // ERGO_VERIFY_HPP
