// Acceptance suite: runs every top-level criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exit code = number of
// failures. Criteria with runtime limits enforce them with a wall clock.
//
// Criterion 10 shells out to the CLI; point ERGO_CLI at the built binary
// and ERGO_GOLDEN_DIR at tests/golden (ctest sets both).

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ergo/averages.hpp"
#include "ergo/decomposition.hpp"
#include "ergo/finite_system.hpp"
#include "ergo/interval_system.hpp"
#include "ergo/io.hpp"
#include "ergo/observable.hpp"
#include "ergo/rational.hpp"
#include "ergo/rng.hpp"
#include "ergo/verify.hpp"

using namespace ergo;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double golden_alpha() { return (std::sqrt(5.0) - 1.0) / 2.0; }

// Fuzzed tuple shared by several criteria.
struct Instance {
  FiniteSystem sys;
  FiniteObservable f;
  FiniteObservable lam;
};

Instance draw_instance(Rng& rng, std::size_t size_bound) {
  Instance inst;
  const std::size_t n = 1 + static_cast<std::size_t>(rng.below(size_bound));
  inst.sys = make_random_preserving(n, rng.next());
  inst.f = random_observable(inst.sys, rng.next());
  if (rng.coin()) {
    inst.lam = make_invariant(inst.sys, rng.next());
  } else {
    const auto den = static_cast<long long>(1 + rng.below(8));
    const long long num = rng.range(-9 * den, 9 * den);
    inst.lam = constant_observable(n, Rational(num, den));
  }
  return inst;
}

// ---------------------------------------------------------------------------

Outcome criterion_1_exact_fuzz() {
  const auto t0 = std::chrono::steady_clock::now();
  FuzzOptions opt;
  opt.trials = 1000;
  opt.size_bound = 64;
  opt.seed = 42;
  const VerificationReport rep = fuzz_maximal(opt);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream detail;
  detail << rep.params.at("passed") << "/1000 trials, " << secs << " s";
  if (!rep.pass || rep.params.at("passed") != "1000") {
    return {false, detail.str() + "; first failure: " +
                       (rep.rows.empty() ? rep.detail : report_to_csv(rep))};
  }
  if (secs >= 60.0) return {false, detail.str() + " (limit 60 s)"};
  return {true, detail.str()};
}

Outcome criterion_2_decomposition_certificates() {
  const Rng master(7);
  for (std::size_t trial = 0; trial < 1000; ++trial) {
    Rng rng = master.substream(trial);
    const Instance inst = draw_instance(rng, 64);
    const auto x = static_cast<std::size_t>(rng.below(inst.sys.size()));
    const std::uint64_t N = 1 + rng.below(8);
    const auto m = static_cast<std::size_t>(1 + rng.below(512));

    const ExactDecomposition dec = decompose(inst.sys, inst.f, inst.lam, x, N, m);
    const CertificateResult cert = verify_decomposition(dec, inst.sys, inst.f, inst.lam, x);
    if (!cert.ok) {
      return {false, "trial " + std::to_string(trial) + ": " + cert.failure};
    }
    const TailBound<Rational> tail = tail_bound_check(dec, inst.f);
    if (!tail.ok || !(tail.total_sum >= tail.tail_sum) || !(tail.tail_sum >= tail.bound)) {
      return {false, "trial " + std::to_string(trial) + ": tail chain violated"};
    }
  }

  // Injected faults must be caught.
  const FiniteSystem swap = make_cycle(2);
  const FiniteObservable f = make_observable({Rational(2, 5), Rational(4, 5)});
  const FiniteObservable lam = constant_observable(2, Rational(1, 2));
  const ExactDecomposition good = decompose(swap, f, lam, 0, 2, 5);
  ExactDecomposition negated = good;
  negated.segments[0].sum = -negated.segments[0].sum;
  if (verify_decomposition(negated, swap, f, lam, 0).ok) {
    return {false, "negated block sum was not caught"};
  }
  ExactDecomposition long_tail = good;
  long_tail.tail_start = 3;  // tail length == N
  if (verify_decomposition(long_tail, swap, f, lam, 0).ok) {
    return {false, "overlong tail was not caught"};
  }
  return {true, "1000/1000 certificates, 2 injected faults caught"};
}

Outcome criterion_3_hand_traces() {
  const FiniteSystem swap = make_cycle(2);
  {
    const FiniteObservable f = make_observable({Rational(1), Rational(0)});
    const FiniteObservable lam = constant_observable(2, Rational(1, 2));
    const ExactDecomposition dec = decompose(swap, f, lam, 0, 2, 7);
    if (dec.segments.size() != 7 || dec.tail_start != 7) {
      return {false, "m=7 trace: wrong segment count or tail"};
    }
    for (std::size_t s = 0; s < 7; ++s) {
      const Segment<Rational>& seg = dec.segments[s];
      const bool is_block = s % 2 == 0;
      if (seg.kind != (is_block ? SegmentKind::block : SegmentKind::zero_run) ||
          seg.start != s || seg.length != 1 ||
          seg.sum != (is_block ? Rational(1, 2) : Rational(0))) {
        return {false, "m=7 trace: segment " + std::to_string(s) + " mismatch"};
      }
    }
  }
  {
    const FiniteObservable f = make_observable({Rational(2, 5), Rational(4, 5)});
    const FiniteObservable lam = constant_observable(2, Rational(1, 2));
    const ExactDecomposition dec = decompose(swap, f, lam, 0, 2, 5);
    if (dec.segments.size() != 2 || dec.tail_start != 4) {
      return {false, "m=5 trace: wrong segment count or tail start"};
    }
    for (std::size_t s = 0; s < 2; ++s) {
      const Segment<Rational>& seg = dec.segments[s];
      if (seg.kind != SegmentKind::block || seg.start != 2 * s || seg.length != 2 ||
          seg.sum != Rational(1, 5)) {
        return {false, "m=5 trace: block " + std::to_string(s) + " mismatch"};
      }
    }
    if (dec.tail_sum() != Rational(-1, 10)) return {false, "m=5 trace: tail sum mismatch"};
  }
  return {true, "both traces byte-exact (blocks 4x1/2 and 2x1/5, tail -1/10)"};
}

Outcome criterion_4_limit_average_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  const Rng master(11);
  for (std::size_t trial = 0; trial < 500; ++trial) {
    Rng rng = master.substream(trial);
    const std::size_t n = 1 + static_cast<std::size_t>(rng.below(48));
    const FiniteSystem sys = make_random_preserving(n, rng.next());
    const FiniteObservable f = random_observable(sys, rng.next());
    if (!check_ergodic_limit(sys, f).pass) {
      return {false, "ergodic limit failed at trial " + std::to_string(trial)};
    }
    if (!check_duality(sys, f).pass) {
      return {false, "duality failed at trial " + std::to_string(trial)};
    }
    if (!check_capped_limit_lambda(sys, f, 16).pass) {
      return {false, "lambda device failed at trial " + std::to_string(trial)};
    }
    for (const Rational& eps : {Rational(1), Rational(1, 10), Rational(1, 100)}) {
      if (!check_limit_epsilon_gap(sys, f, eps).pass) {
        return {false, "final application failed at trial " + std::to_string(trial)};
      }
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream detail;
  detail << "500/500 systems, " << secs << " s";
  if (secs >= 30.0) return {false, detail.str() + " (limit 30 s)"};
  return {true, detail.str()};
}

Outcome criterion_5_truncation() {
  const Rng master(13);
  for (std::size_t trial = 0; trial < 200; ++trial) {
    Rng rng = master.substream(trial);
    const std::size_t n = 1 + static_cast<std::size_t>(rng.below(48));
    const FiniteSystem sys = make_random_preserving(n, rng.next());
    FiniteObservable f = random_observable(sys, rng.next());
    // Monotone truncation holds for one-signed observables; alternate sign.
    const bool nonneg = trial % 2 == 0;
    for (Rational& v : f.values) v = nonneg ? abs(v) : -abs(v);
    const auto den = static_cast<long long>(1 + rng.below(4));
    const long long num = rng.range(-9 * den, 9 * den);
    const FiniteObservable lam = constant_observable(n, Rational(num, den));
    const std::uint64_t N = 1 + rng.below(8);
    std::vector<Rational> schedule;
    for (const Rational& v : f.values) schedule.push_back(abs(v));
    std::sort(schedule.begin(), schedule.end());
    schedule.erase(std::unique(schedule.begin(), schedule.end()), schedule.end());

    const VerificationReport rep = check_truncation(sys, f, lam, N, schedule);
    if (!rep.pass) {
      return {false, "trial " + std::to_string(trial) + ": " + rep.detail};
    }
    if (rep.rows.back().at("symmetric_difference") != "0" ||
        rep.rows.back().at("l1_distance") != "0") {
      return {false, "trial " + std::to_string(trial) + ": distances not zero at max |f|"};
    }
  }
  return {true, "200/200 sweeps monotone, exact zero at s = max|f|"};
}

Outcome criterion_6_sup_oracle() {
  const Rng master(17);
  for (std::size_t trial = 0; trial < 500; ++trial) {
    Rng rng = master.substream(trial);
    const std::size_t n = 1 + static_cast<std::size_t>(rng.below(64));
    const FiniteSystem sys = make_random_preserving(n, rng.next());
    const FiniteObservable f = random_observable(sys, rng.next());
    for (std::size_t x = 0; x < n; ++x) {
      if (sys.weights[x] == 0) continue;
      const SupAverage sup = sup_average(sys, f, x);
      const std::size_t M = 10 * (sup.preperiod + sup.period);
      // Independent oracle: plain running-sum maximum over windows <= M.
      Rational sum(0);
      Rational best;
      std::size_t y = x;
      for (std::size_t k = 1; k <= M; ++k) {
        sum += f.values[y];
        const Rational avg = sum / static_cast<unsigned long>(k);
        if (k == 1 || avg > best) best = avg;
        y = sys.map[y];
      }
      const Rational oracle = std::max(best, sup.cycle_average);
      if (sup.value != oracle) {
        return {false, "trial " + std::to_string(trial) + ", point " + std::to_string(x) +
                           ": closed form " + format_rational(sup.value) + " != oracle " +
                           format_rational(oracle)};
      }
    }
  }
  return {true, "500/500 systems agree with the brute-force oracle"};
}

Outcome criterion_7_rotation() {
  const auto t0 = std::chrono::steady_clock::now();
  const double alpha = golden_alpha();
  const std::uint64_t K = 1000000;
  const IntervalSystem rot = IntervalSystem::rotation(alpha);
  const IntervalObservable f = named_observable("cos2pi");
  const double average = birkhoff_average(rot, f, 0.0, K);
  const double pi = 3.14159265358979323846;
  const double bound = 1.0 / (static_cast<double>(K) * std::sin(pi * alpha));
  const double slack = 2.0 * pi * static_cast<double>(K) * 2.220446049250313e-16;
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::ostringstream detail;
  detail << "|A_K| = " << std::fabs(average) << " <= " << bound << " + " << slack << ", "
         << secs << " s";
  if (std::fabs(average) > bound + slack) return {false, detail.str()};
  if (secs >= 1.0) return {false, detail.str() + " (limit 1 s)"};
  if (!check_rotation_equidistribution(alpha, 0.0, K).pass) {
    return {false, "report-level check disagrees"};
  }

  const IntervalSystem rot3 = IntervalSystem::rotation(1.0 / 3.0);
  const std::uint64_t K3 = 999999;  // divisible by 3
  const double a3 = birkhoff_average(rot3, f, 0.0, K3);
  std::ostringstream a3_text;
  a3_text << std::fabs(a3);
  if (std::fabs(a3) > 1e-9) {
    return {false, "alpha=1/3: |A_K| = " + a3_text.str() + " > 1e-9"};
  }
  return {true, detail.str() + "; alpha=1/3 |A_K| = " + a3_text.str()};
}

Outcome criterion_8_doubling_orbit() {
  const IntervalSystem dbl = IntervalSystem::doubling();
  const std::vector<Rational> expected = {
      Rational(1, 11), Rational(2, 11), Rational(4, 11), Rational(8, 11),
      Rational(5, 11), Rational(10, 11), Rational(9, 11), Rational(7, 11),
      Rational(3, 11), Rational(6, 11)};
  const std::vector<Rational> orbit10 = dbl.orbit(Rational(1, 11), 10);
  if (orbit10 != expected) return {false, "orbit values differ"};
  if (dbl.apply(orbit10.back()) != orbit10.front()) return {false, "period is not 10"};
  for (std::size_t k = 1; k < 10; ++k) {
    if (orbit10[k] == orbit10[0]) return {false, "period shorter than 10"};
  }
  const Rational a10 =
      birkhoff_average(dbl, named_observable("indicator_lower_half"), Rational(1, 11), 10);
  if (a10 != Rational(1, 2)) {
    return {false, "A_10 = " + format_rational(a10) + " != 1/2"};
  }
  return {true, "period 10, A_10 = 1/2 exactly"};
}

Outcome criterion_9_monte_carlo() {
  const IntervalSystem rot = IntervalSystem::rotation(golden_alpha());
  const IntervalObservable f = named_observable("cos2pi");
  const SamplePlan plan = random_plan(100000, 5);
  const VerificationReport one = check_maximal_inequality_mc(rot, f, 0.0, 50, plan, true, 1);
  const VerificationReport four = check_maximal_inequality_mc(rot, f, 0.0, 50, plan, true, 4);
  if (!one.pass) return {false, "estimate below -3*stderr"};
  if (*one.estimate != *four.estimate || *one.std_error != *four.std_error) {
    return {false, "thread counts disagree bit-for-bit"};
  }
  std::ostringstream detail;
  detail << "estimate " << *one.estimate << " +- " << *one.std_error
         << ", identical across 1 and 4 threads";
  return {true, detail.str()};
}

// -- criterion 10 helpers ----------------------------------------------------

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run_cli(const std::string& cli, const std::string& args) {
  RunResult result;
  FILE* pipe = popen((cli + " " + args + " 2>/dev/null").c_str(), "r");
  if (!pipe) return result;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) result.output.append(buf.data(), n);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

Outcome criterion_10_cli_goldens() {
  const char* cli_env = std::getenv("ERGO_CLI");
  const char* dir_env = std::getenv("ERGO_GOLDEN_DIR");
  if (!cli_env || !dir_env) {
    return {false, "set ERGO_CLI and ERGO_GOLDEN_DIR (ctest does this automatically)"};
  }
  const std::string cli = cli_env;
  const std::string dir = dir_env;

  const RunResult validate = run_cli(cli, "validate " + dir + "/swap_f10.json");
  if (validate.exit_code != 0) return {false, "validate exit code != 0"};
  if (validate.output != slurp(dir + "/validate_swap.golden")) {
    return {false, "validate output differs from golden"};
  }

  const RunResult maximal =
      run_cli(cli, "check maximal " + dir + "/swap_f10.json --lambda 3/5 --N inf");
  if (maximal.exit_code != 0) return {false, "check maximal exit code != 0"};
  if (maximal.output != slurp(dir + "/check_maximal_swap.golden")) {
    return {false, "check maximal output differs from golden"};
  }

  const RunResult dec = run_cli(
      cli, "decompose " + dir + "/swap_f2545.json --x 0 --N 2 --m 5 --lambda 1/2 --trace");
  if (dec.exit_code != 0) return {false, "decompose exit code != 0"};
  if (dec.output != slurp(dir + "/decompose_swap.golden")) {
    return {false, "decompose output differs from golden"};
  }

  if (run_cli(cli, "validate " + dir + "/bad_weights.json").exit_code != 1) {
    return {false, "failing validation should exit 1"};
  }
  if (run_cli(cli, "validate " + dir + "/malformed.json").exit_code != 2) {
    return {false, "malformed input should exit 2"};
  }
  return {true, "3 golden files byte-identical; exit codes 0/1/2 as contracted"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"exact maximal-inequality fuzz (1000 trials, zero tolerance, <60 s)",
       criterion_1_exact_fuzz},
      {"decomposition certificates (1000 fuzzed instances + injected faults)",
       criterion_2_decomposition_certificates},
      {"hand-traced decompositions reproduce exactly", criterion_3_hand_traces},
      {"limit-average suite (500 systems, exact, <30 s)", criterion_4_limit_average_suite},
      {"truncation sweeps (200 systems, monotone, exact limits)", criterion_5_truncation},
      {"unbounded sup closed form vs brute-force oracle (500 systems)", criterion_6_sup_oracle},
      {"rotation equidistribution bounds (golden and 1/3, <1 s)", criterion_7_rotation},
      {"doubling-map exact orbit and average", criterion_8_doubling_orbit},
      {"Monte Carlo inequality (1e5 samples, thread-stable)", criterion_9_monte_carlo},
      {"CLI golden files and exit codes", criterion_10_cli_goldens},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (outcome.pass ? "[PASS]" : "[FAIL]") << " criterion " << (i + 1) << ": "
              << criteria[i].first;
    if (!outcome.detail.empty()) std::cout << " -- " << outcome.detail;
    std::cout << std::endl;
    if (!outcome.pass) ++failures;
  }
  return failures;
}
