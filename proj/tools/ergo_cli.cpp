// Command-line front end.
//
// Subcommands: validate, average, maximal, decompose, check, fuzz,
// converge, report. System descriptions are JSON files (see README);
// rationals cross the boundary as "p/q" strings.
//
// Exit status: 0 = command ran and its verdict is pass;
//              1 = command ran and a mathematical check failed
//                  (the report carries replay data);
//              2 = input or validation error (malformed file, bad flags,
//                  precondition violations, uncertifiable float signs).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ergo/averages.hpp"
#include "ergo/decomposition.hpp"
#include "ergo/finite_system.hpp"
#include "ergo/interval_system.hpp"
#include "ergo/io.hpp"
#include "ergo/observable.hpp"
#include "ergo/rational.hpp"
#include "ergo/verify.hpp"

namespace {

using ergo::Json;
using ergo::Rational;

struct OutputOptions {
  std::string format = "json";
  std::string out_path;
};

void emit(const OutputOptions& opt, const std::string& text) {
  if (opt.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(opt.out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file '" + opt.out_path + "'");
  out << text;
}

void emit_report(const OutputOptions& opt, const ergo::VerificationReport& rep) {
  if (opt.format == "csv") {
    emit(opt, ergo::report_to_csv(rep));
  } else {
    emit(opt, ergo::canonical_dump(ergo::report_to_json(rep)));
  }
}

std::optional<std::uint64_t> parse_window(const std::string& text) {
  if (text == "inf" || text == "INF" || text == "infinity") return std::nullopt;
  try {
    const unsigned long long v = std::stoull(text);
    if (v == 0) throw std::invalid_argument("N must be positive");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("--N expects a positive integer or 'inf', got '" + text + "'");
  }
}

std::size_t parse_point_index(const std::string& text, std::size_t n) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != text.size()) {
    throw std::invalid_argument("--x expects a point index for finite systems, got '" + text +
                                "'");
  }
  if (v >= n) {
    throw std::invalid_argument("point index " + text + " out of range [0, " +
                                std::to_string(n) + ")");
  }
  return static_cast<std::size_t>(v);
}

double parse_double_or_rational(const std::string& text) {
  try {
    return ergo::to_double(ergo::parse_rational(text));
  } catch (const std::invalid_argument&) {
  }
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("expected a number or \"p/q\", got '" + text + "'");
}

double parse_alpha(const std::string& text) {
  if (text == "golden") return (std::sqrt(5.0) - 1.0) / 2.0;
  return parse_double_or_rational(text);
}

const ergo::FiniteObservable& require_finite_observable(const ergo::SystemDescription& desc) {
  if (!desc.finite_observable) {
    throw std::invalid_argument("system file carries no observable values");
  }
  return *desc.finite_observable;
}

const ergo::IntervalObservable& require_interval_observable(const ergo::SystemDescription& desc) {
  if (!desc.interval_observable) {
    throw std::invalid_argument("system file names no observable");
  }
  return *desc.interval_observable;
}

ergo::FiniteSystem require_validated(const ergo::SystemDescription& desc) {
  const ergo::FiniteSystem& sys = desc.finite();
  const ergo::ValidationResult result = ergo::validate(sys);
  if (!result.ok) {
    throw std::invalid_argument("system fails validation: " + result.reason);
  }
  return sys;
}

std::vector<Rational> parse_schedule(const std::string& text) {
  std::vector<Rational> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (!item.empty()) out.push_back(ergo::parse_rational(item));
  }
  if (out.empty()) throw std::invalid_argument("empty schedule '" + text + "'");
  return out;
}

// ---------------------------------------------------------------------------

int run_validate(const std::string& path, const OutputOptions& out) {
  const ergo::SystemDescription desc = ergo::load_system_file(path);
  ergo::VerificationReport rep;
  rep.check = "validate";
  rep.mode = "exact";
  if (!desc.is_finite()) {
    // Interval kinds preserve Lebesgue measure by construction; their
    // invariants are enforced when the description is parsed.
    rep.system = ergo::describe(desc.interval());
    rep.pass = true;
    rep.detail = "interval kinds preserve Lebesgue measure by construction";
    emit_report(out, rep);
    return 0;
  }
  const ergo::FiniteSystem& sys = desc.finite();
  rep.system = ergo::describe(sys);
  const ergo::ValidationResult result = ergo::validate(sys);
  rep.pass = result.ok;
  if (!result.ok) {
    rep.detail = result.reason;
    if (result.first_bad_point) {
      rep.params["first_bad_point"] = std::to_string(*result.first_bad_point);
    }
  }
  emit_report(out, rep);
  return rep.pass ? 0 : 1;
}

int run_average(const std::string& path, const std::string& x_text, std::uint64_t k,
                const OutputOptions& out) {
  const ergo::SystemDescription desc = ergo::load_system_file(path);
  Json j;
  j["check"] = "average";
  j["k"] = k;
  j["x"] = x_text;
  if (desc.is_finite()) {
    const ergo::FiniteSystem sys = require_validated(desc);
    const std::size_t x = parse_point_index(x_text, sys.size());
    const Rational value =
        ergo::birkhoff_average(sys, require_finite_observable(desc), x, k);
    j["value"] = ergo::format_rational(value);
  } else {
    const ergo::IntervalSystem& sys = desc.interval();
    const ergo::IntervalObservable& f = require_interval_observable(desc);
    if (sys.exact_state()) {
      const Rational x = ergo::parse_rational(x_text);
      j["value"] = ergo::format_rational(ergo::birkhoff_average(sys, f, x, k));
    } else {
      j["value"] = ergo::birkhoff_average(sys, f, parse_double_or_rational(x_text), k);
    }
  }
  emit(out, ergo::canonical_dump(j));
  return 0;
}

int run_maximal(const std::string& path, const std::string& x_text, const std::string& n_text,
                const OutputOptions& out) {
  const ergo::SystemDescription desc = ergo::load_system_file(path);
  const std::optional<std::uint64_t> window = parse_window(n_text);
  Json j;
  j["check"] = "maximal";
  j["N"] = ergo::format_window(window);
  j["x"] = x_text;
  if (desc.is_finite()) {
    const ergo::FiniteSystem sys = require_validated(desc);
    const std::size_t x = parse_point_index(x_text, sys.size());
    const ergo::FiniteObservable& f = require_finite_observable(desc);
    if (window) {
      j["value"] = ergo::format_rational(
          ergo::maximal_function(sys, f, x, static_cast<std::size_t>(*window)));
    } else {
      const ergo::SupAverage sup = ergo::sup_average(sys, f, x);
      j["value"] = ergo::format_rational(sup.value);
      j["attained"] = sup.attained;
    }
  } else {
    if (!window) {
      throw std::invalid_argument("--N inf requires a finite system");
    }
    const ergo::IntervalSystem& sys = desc.interval();
    const ergo::IntervalObservable& f = require_interval_observable(desc);
    if (sys.exact_state()) {
      const Rational x = ergo::parse_rational(x_text);
      j["value"] = ergo::format_rational(ergo::maximal_function(sys, f, x, *window));
    } else {
      j["value"] = ergo::maximal_function(sys, f, parse_double_or_rational(x_text), *window);
    }
  }
  emit(out, ergo::canonical_dump(j));
  return 0;
}

int run_decompose(const std::string& path, const std::string& x_text,
                  const std::string& lambda_text, std::uint64_t N, std::size_t m, bool trace,
                  const OutputOptions& out) {
  const ergo::SystemDescription desc = ergo::load_system_file(path);
  Json j;
  bool certified = true;
  if (desc.is_finite()) {
    const ergo::FiniteSystem sys = require_validated(desc);
    const std::size_t x = parse_point_index(x_text, sys.size());
    const ergo::FiniteObservable& f = require_finite_observable(desc);
    const ergo::FiniteObservable lam =
        ergo::constant_observable(sys.size(), ergo::parse_rational(lambda_text));
    const ergo::ExactDecomposition dec = ergo::decompose(sys, f, lam, x, N, m);
    const ergo::CertificateResult cert = ergo::verify_decomposition(dec, sys, f, lam, x);
    const ergo::TailBound<Rational> tail = ergo::tail_bound_check(dec, f);
    j = ergo::decomposition_to_json(dec, x_text, trace);
    j["certificate"] = cert.ok ? "pass" : "fail";
    if (!cert.ok) j["certificate_detail"] = cert.failure;
    j["tail_bound"] = ergo::format_rational(tail.bound);
    j["tail_bound_ok"] = tail.ok;
    certified = cert.ok && tail.ok;
  } else {
    const ergo::IntervalSystem& sys = desc.interval();
    const ergo::IntervalObservable& f = require_interval_observable(desc);
    if (sys.exact_state()) {
      const Rational x = ergo::parse_rational(x_text);
      const Rational lambda = ergo::parse_rational(lambda_text);
      const ergo::ExactDecomposition dec = ergo::decompose(sys, f, lambda, x, N, m);
      const ergo::TailBound<Rational> tail =
          ergo::tail_bound_check(dec, Rational(f.sup_bound));
      j = ergo::decomposition_to_json(dec, x_text, trace);
      j["tail_bound"] = ergo::format_rational(tail.bound);
      j["tail_bound_ok"] = tail.ok;
      certified = tail.ok;
    } else {
      const double x = parse_double_or_rational(x_text);
      const double lambda = parse_double_or_rational(lambda_text);
      const ergo::SampledDecomposition dec = ergo::decompose(sys, f, lambda, x, N, m);
      const ergo::CertificateResult cert = ergo::verify_decomposition(dec, sys, f, lambda, x);
      const ergo::TailBound<double> tail = ergo::tail_bound_check(dec, f);
      j = ergo::decomposition_to_json(dec, x_text, trace);
      j["certificate"] = cert.ok ? "pass" : "fail";
      if (!cert.ok) j["certificate_detail"] = cert.failure;
      j["tail_bound"] = tail.bound;
      j["tail_bound_ok"] = tail.ok;
      certified = cert.ok && tail.ok;
    }
  }
  emit(out, ergo::canonical_dump(j));
  return certified ? 0 : 1;
}

int run_converge(const std::string& path, const std::string& x_text, std::uint64_t K,
                 std::uint64_t stride, const OutputOptions& out) {
  if (K == 0) throw std::invalid_argument("--K must be positive");
  if (stride == 0) throw std::invalid_argument("--stride must be positive");
  const ergo::SystemDescription desc = ergo::load_system_file(path);
  std::ostringstream csv;
  if (desc.is_finite()) {
    const ergo::FiniteSystem sys = require_validated(desc);
    const std::size_t x = parse_point_index(x_text, sys.size());
    const ergo::FiniteObservable& f = require_finite_observable(desc);
    csv << "k,average,exact\n";
    Rational sum(0);
    std::size_t y = x;
    for (std::uint64_t k = 1; k <= K; ++k) {
      sum += f.values[y];
      y = sys.map[y];
      if (k % stride == 0) {
        const Rational avg = sum / static_cast<unsigned long>(k);
        csv << k << ',' << ergo::to_decimal_string(avg) << ',' << ergo::format_rational(avg)
            << '\n';
      }
    }
  } else {
    const ergo::IntervalSystem& sys = desc.interval();
    const ergo::IntervalObservable& f = require_interval_observable(desc);
    if (sys.exact_state()) {
      const Rational x0 = ergo::parse_rational(x_text);
      csv << "k,average,exact\n";
      Rational sum(0);
      Rational y = x0;
      for (std::uint64_t k = 1; k <= K; ++k) {
        sum += f.exact_value(y);
        y = sys.apply(y);
        if (k % stride == 0) {
          const Rational avg = sum / static_cast<unsigned long>(k);
          csv << k << ',' << ergo::to_decimal_string(avg) << ',' << ergo::format_rational(avg)
              << '\n';
        }
      }
    } else {
      const double x0 = parse_double_or_rational(x_text);
      csv << "k,average\n";
      double sum = 0.0;
      double y = x0;
      for (std::uint64_t k = 1; k <= K; ++k) {
        sum += f.value(y);
        y = sys.apply(y);
        if (k % stride == 0) {
          csv << k << ',' << ergo::to_decimal_string(Rational(sum / static_cast<double>(k)))
              << '\n';
        }
      }
    }
  }
  emit(out, csv.str());
  return 0;
}

int run_report(const std::string& path, std::uint64_t make_cycle_n, std::uint64_t make_random_n,
               std::uint64_t seed, const OutputOptions& out) {
  Json j;
  if (make_cycle_n > 0) {
    j = ergo::system_to_json(ergo::make_cycle(static_cast<std::size_t>(make_cycle_n)));
  } else if (make_random_n > 0) {
    const ergo::FiniteSystem sys =
        ergo::make_random_preserving(static_cast<std::size_t>(make_random_n), seed);
    const ergo::FiniteObservable f = ergo::random_observable(sys, seed + 1);
    j = ergo::system_to_json(sys, &f);
  } else if (!path.empty()) {
    const ergo::SystemDescription desc = ergo::load_system_file(path);
    if (desc.is_finite()) {
      j = ergo::system_to_json(desc.finite(),
                               desc.finite_observable ? &*desc.finite_observable : nullptr);
    } else {
      j = ergo::system_to_json(desc.interval(), desc.interval_observable
                                                    ? desc.interval_observable->name
                                                    : std::string());
    }
  } else {
    throw std::invalid_argument("report needs a FILE or --make-cycle/--make-random");
  }
  emit(out, ergo::canonical_dump(j));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact and statistical checks for Birkhoff averages and maximal inequalities"};
  app.require_subcommand(1);

  OutputOptions out;
  app.add_option("--format", out.format, "output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--out", out.out_path, "write output to a file instead of stdout");

  std::string file, x_text, n_text = "inf", lambda_text, alpha_text = "golden";
  std::string s_schedule, fault_text = "none", plan_text = "pseudorandom";
  std::uint64_t k = 1, K = 1000, stride = 1, N = 1, seed = 0, samples = 100000;
  std::uint64_t trials = 1000, size_bound = 64, make_cycle_n = 0, make_random_n = 0;
  std::uint64_t sweep_n = 16, intervals = 16;
  std::size_t m = 1;
  unsigned threads = 1;
  double x0 = 0.0;
  std::string eps_text = "1/10";
  bool trace = false, lambda_nonintegrable = false;

  CLI::App* validate = app.add_subcommand("validate", "validate a system description");
  validate->add_option("file", file, "system file")->required();

  CLI::App* average = app.add_subcommand("average", "Birkhoff average A_k f(x)");
  average->add_option("file", file)->required();
  average->add_option("--x", x_text, "start point")->required();
  average->add_option("--k", k, "window length")->required();

  CLI::App* maximal = app.add_subcommand("maximal", "windowed maximal function f*_N(x)");
  maximal->add_option("file", file)->required();
  maximal->add_option("--x", x_text)->required();
  maximal->add_option("--N", n_text, "window bound or 'inf'")->required();

  CLI::App* decomp = app.add_subcommand("decompose", "orbit-sum string decomposition");
  decomp->add_option("file", file)->required();
  decomp->add_option("--x", x_text)->required();
  decomp->add_option("--N", N, "window bound")->required();
  decomp->add_option("--m", m, "horizon")->required();
  decomp->add_option("--lambda", lambda_text)->required();
  decomp->add_flag("--trace", trace, "include per-index terms and flags");

  CLI::App* check = app.add_subcommand("check", "run a verification check");
  check->require_subcommand(1);

  CLI::App* c_maximal = check->add_subcommand("maximal", "integral over the level set >= 0");
  c_maximal->add_option("file", file)->required();
  c_maximal->add_option("--lambda", lambda_text)->required();
  c_maximal->add_option("--N", n_text);
  c_maximal->add_option("--M", samples, "sample count (interval systems)");
  c_maximal->add_option("--plan", plan_text)->check(CLI::IsMember({"grid", "pseudorandom"}));
  c_maximal->add_option("--seed", seed);
  c_maximal->add_option("--threads", threads);
  c_maximal->add_flag("--lambda-nonintegrable", lambda_nonintegrable,
                      "declare lambda^+ non-integrable (vacuous branch)");

  CLI::App* c_ergodic = check->add_subcommand("ergodic", "integral of the limit average");
  c_ergodic->add_option("file", file)->required();

  CLI::App* c_duality = check->add_subcommand("duality", "liminf f = -limsup(-f)");
  c_duality->add_option("file", file)->required();

  CLI::App* c_cap = check->add_subcommand("cap-sweep", "capped-limit lambda sweep min(limit, n) - 1/n");
  c_cap->add_option("file", file)->required();
  c_cap->add_option("--n", sweep_n, "sweep bound");

  CLI::App* c_final = check->add_subcommand("epsilon-gap", "lambda = limit - epsilon application");
  c_final->add_option("file", file)->required();
  c_final->add_option("--eps", eps_text, "positive rational epsilon");

  CLI::App* c_trunc = check->add_subcommand("truncation", "truncation sweep");
  c_trunc->add_option("file", file)->required();
  c_trunc->add_option("--lambda", lambda_text)->required();
  c_trunc->add_option("--N", N)->required();
  c_trunc->add_option("--s-schedule", s_schedule, "comma-separated nondecreasing rationals");

  CLI::App* c_rot = check->add_subcommand("rotation", "rotation equidistribution bound");
  c_rot->add_option("--alpha", alpha_text, "angle in (0,1) or 'golden'");
  c_rot->add_option("--x0", x0);
  c_rot->add_option("--K", K)->required();

  CLI::App* c_pres = check->add_subcommand("preservation", "sampled measure preservation");
  c_pres->add_option("file", file)->required();
  c_pres->add_option("--M", samples);
  c_pres->add_option("--seed", seed);
  c_pres->add_option("--intervals", intervals);

  CLI::App* fuzz = app.add_subcommand("fuzz", "randomized maximal-inequality trials");
  fuzz->add_option("--trials", trials);
  fuzz->add_option("--size-bound", size_bound);
  fuzz->add_option("--seed", seed);
  fuzz->add_option("--fault", fault_text)
      ->check(CLI::IsMember({"none", "level-set-ge", "unnormalized-weights"}));

  CLI::App* converge = app.add_subcommand("converge", "CSV series of A_k f(x)");
  converge->add_option("file", file)->required();
  converge->add_option("--x", x_text)->required();
  converge->add_option("--K", K)->required();
  converge->add_option("--stride", stride);

  CLI::App* report = app.add_subcommand("report", "canonical system description");
  report->add_option("file", file);
  report->add_option("--make-cycle", make_cycle_n, "emit a uniform n-cycle");
  report->add_option("--make-random", make_random_n, "emit a random preserving system");
  report->add_option("--seed", seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*validate) return run_validate(file, out);
    if (*average) return run_average(file, x_text, k, out);
    if (*maximal) return run_maximal(file, x_text, n_text, out);
    if (*decomp) return run_decompose(file, x_text, lambda_text, N, m, trace, out);
    if (*converge) return run_converge(file, x_text, K, stride, out);
    if (*report) return run_report(file, make_cycle_n, make_random_n, seed, out);
    if (*fuzz) {
      ergo::FuzzOptions opt;
      opt.trials = static_cast<std::size_t>(trials);
      opt.size_bound = static_cast<std::size_t>(size_bound);
      opt.seed = seed;
      opt.fault = fault_text == "level-set-ge" ? ergo::InjectedFault::level_set_ge
                  : fault_text == "unnormalized-weights"
                      ? ergo::InjectedFault::unnormalized_weights
                      : ergo::InjectedFault::none;
      const ergo::VerificationReport rep = ergo::fuzz_maximal(opt);
      emit_report(out, rep);
      return rep.pass ? 0 : 1;
    }
    if (*check) {
      ergo::VerificationReport rep;
      if (*c_rot) {
        rep = ergo::check_rotation_equidistribution(parse_alpha(alpha_text), x0, K);
      } else if (*c_pres) {
        const ergo::SystemDescription desc = ergo::load_system_file(file);
        if (desc.is_finite()) {
          throw std::invalid_argument("preservation check targets interval systems");
        }
        rep = ergo::check_measure_preservation_mc(
            desc.interval(), ergo::random_plan(samples, seed),
            static_cast<std::size_t>(intervals), seed + 1);
      } else if (*c_maximal) {
        const ergo::SystemDescription desc = ergo::load_system_file(file);
        if (desc.is_finite()) {
          const ergo::FiniteSystem sys = require_validated(desc);
          const ergo::FiniteObservable& f = require_finite_observable(desc);
          const ergo::FiniteObservable lam =
              ergo::constant_observable(sys.size(), ergo::parse_rational(lambda_text));
          rep = ergo::check_maximal_inequality(sys, f, lam, parse_window(n_text));
          rep.params["lambda"] = lambda_text;
        } else {
          const std::optional<std::uint64_t> window = parse_window(n_text);
          if (!window) throw std::invalid_argument("interval systems need a finite --N");
          const ergo::SamplePlan plan = plan_text == "grid"
                                            ? ergo::grid_plan(samples)
                                            : ergo::random_plan(samples, seed);
          rep = ergo::check_maximal_inequality_mc(
              desc.interval(), require_interval_observable(desc),
              parse_double_or_rational(lambda_text), *window, plan,
              !lambda_nonintegrable, threads);
        }
      } else {
        const ergo::SystemDescription desc = ergo::load_system_file(file);
        const ergo::FiniteSystem sys = require_validated(desc);
        const ergo::FiniteObservable& f = require_finite_observable(desc);
        if (*c_ergodic) {
          rep = ergo::check_ergodic_limit(sys, f);
        } else if (*c_duality) {
          rep = ergo::check_duality(sys, f);
        } else if (*c_cap) {
          rep = ergo::check_capped_limit_lambda(sys, f, static_cast<unsigned>(sweep_n));
        } else if (*c_final) {
          rep = ergo::check_limit_epsilon_gap(sys, f, ergo::parse_rational(eps_text));
        } else if (*c_trunc) {
          const ergo::FiniteObservable lam =
              ergo::constant_observable(sys.size(), ergo::parse_rational(lambda_text));
          std::vector<Rational> schedule;
          if (s_schedule.empty()) {
            for (const Rational& v : f.values) schedule.push_back(abs(v));
            std::sort(schedule.begin(), schedule.end());
            schedule.erase(std::unique(schedule.begin(), schedule.end()), schedule.end());
          } else {
            schedule = parse_schedule(s_schedule);
          }
          rep = ergo::check_truncation(sys, f, lam, N, schedule);
        }
      }
      emit_report(out, rep);
      return rep.pass ? 0 : 1;
    }
  } catch (const ergo::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ergo::PrecisionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
