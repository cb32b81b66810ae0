// Serialization: system-description files, verification reports and
// decomposition certificates.
//
// Rationals cross every boundary as "p/q" strings, never as floats, so a
// file written by the CLI reloads to a bit-identical system. JSON objects
// are emitted with sorted keys and a trailing newline, which makes output
// suitable for byte-for-byte golden comparisons.

#ifndef ERGO_IO_HPP
#define ERGO_IO_HPP

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ergo/decomposition.hpp"
#include "ergo/finite_system.hpp"
#include "ergo/interval_system.hpp"
#include "ergo/observable.hpp"
#include "ergo/rational.hpp"
#include "ergo/verify.hpp"

namespace ergo {

using Json = nlohmann::json;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SystemDescription {
  std::variant<FiniteSystem, IntervalSystem> system;
  std::optional<FiniteObservable> finite_observable;
  std::optional<IntervalObservable> interval_observable;

  bool is_finite() const { return std::holds_alternative<FiniteSystem>(system); }
  const FiniteSystem& finite() const { return std::get<FiniteSystem>(system); }
  const IntervalSystem& interval() const { return std::get<IntervalSystem>(system); }
};

// ---------------------------------------------------------------------------
// System-description files

inline Json system_to_json(const FiniteSystem& sys, const FiniteObservable* obs = nullptr) {
  Json j;
  j["type"] = "finite";
  Json weights = Json::array();
  for (const Rational& w : sys.weights) weights.push_back(format_rational(w));
  j["weights"] = std::move(weights);
  j["map"] = sys.map;
  if (obs) {
    Json values = Json::array();
    for (const Rational& v : obs->values) values.push_back(format_rational(v));
    j["observable"] = std::move(values);
    j["sup_bound"] = format_rational(obs->sup_bound);
  }
  return j;
}

inline Json system_to_json(const IntervalSystem& sys, const std::string& observable_name) {
  Json j;
  switch (sys.kind()) {
    case IntervalKind::rotation:
      j["type"] = "rotation";
      j["alpha"] = sys.alpha();
      break;
    case IntervalKind::doubling:
      j["type"] = "doubling";
      break;
    case IntervalKind::identity:
      j["type"] = "identity";
      break;
    case IntervalKind::interval_exchange: {
      j["type"] = "interval_exchange";
      Json lengths = Json::array();
      for (const Rational& len : sys.lengths()) lengths.push_back(format_rational(len));
      j["lengths"] = std::move(lengths);
      j["permutation"] = sys.permutation();
      break;
    }
  }
  if (!observable_name.empty()) j["observable"] = observable_name;
  return j;
}

namespace detail {

inline Rational parse_rational_field(const Json& j, const std::string& where) {
  if (!j.is_string()) {
    throw ParseError("field '" + where + "': expected a rational as a \"p/q\" string");
  }
  try {
    return parse_rational(j.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ParseError("field '" + where + "': " + e.what());
  }
}

inline const Json& require_field(const Json& j, const std::string& key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError("missing field '" + key + "'");
  return *it;
}

}  // namespace detail

inline SystemDescription system_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("system description must be a JSON object");
  const Json& type = detail::require_field(j, "type");
  if (!type.is_string()) throw ParseError("field 'type': expected a string");
  const std::string kind = type.get<std::string>();

  SystemDescription desc{FiniteSystem{}, std::nullopt, std::nullopt};
  if (kind == "finite") {
    FiniteSystem sys;
    const Json& weights = detail::require_field(j, "weights");
    if (!weights.is_array()) throw ParseError("field 'weights': expected an array");
    for (std::size_t i = 0; i < weights.size(); ++i) {
      sys.weights.push_back(
          detail::parse_rational_field(weights[i], "weights[" + std::to_string(i) + "]"));
    }
    const Json& map = detail::require_field(j, "map");
    if (!map.is_array()) throw ParseError("field 'map': expected an array");
    for (std::size_t i = 0; i < map.size(); ++i) {
      if (!map[i].is_number_integer() || map[i].get<long long>() < 0) {
        throw ParseError("field 'map[" + std::to_string(i) + "]': expected a point index");
      }
      sys.map.push_back(map[i].get<std::size_t>());
    }
    desc.system = std::move(sys);
    if (j.contains("observable")) {
      const Json& values = j.at("observable");
      if (!values.is_array()) throw ParseError("field 'observable': expected an array");
      std::vector<Rational> parsed;
      for (std::size_t i = 0; i < values.size(); ++i) {
        parsed.push_back(
            detail::parse_rational_field(values[i], "observable[" + std::to_string(i) + "]"));
      }
      if (j.contains("sup_bound")) {
        const Rational bound = detail::parse_rational_field(j.at("sup_bound"), "sup_bound");
        try {
          desc.finite_observable = make_observable(std::move(parsed), bound);
        } catch (const std::invalid_argument& e) {
          throw ParseError(std::string("field 'sup_bound': ") + e.what());
        }
      } else {
        desc.finite_observable = make_observable(std::move(parsed));
      }
    }
    return desc;
  }

  IntervalSystem sys = IntervalSystem::identity();
  if (kind == "rotation") {
    const Json& alpha = detail::require_field(j, "alpha");
    if (!alpha.is_number()) throw ParseError("field 'alpha': expected a number in (0, 1)");
    try {
      sys = IntervalSystem::rotation(alpha.get<double>());
    } catch (const std::invalid_argument& e) {
      throw ParseError(std::string("field 'alpha': ") + e.what());
    }
  } else if (kind == "doubling") {
    sys = IntervalSystem::doubling();
  } else if (kind == "identity") {
    sys = IntervalSystem::identity();
  } else if (kind == "interval_exchange") {
    const Json& lengths = detail::require_field(j, "lengths");
    const Json& perm = detail::require_field(j, "permutation");
    if (!lengths.is_array()) throw ParseError("field 'lengths': expected an array");
    if (!perm.is_array()) throw ParseError("field 'permutation': expected an array");
    std::vector<Rational> parsed_lengths;
    for (std::size_t i = 0; i < lengths.size(); ++i) {
      parsed_lengths.push_back(
          detail::parse_rational_field(lengths[i], "lengths[" + std::to_string(i) + "]"));
    }
    std::vector<std::size_t> parsed_perm;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      if (!perm[i].is_number_integer() || perm[i].get<long long>() < 0) {
        throw ParseError("field 'permutation[" + std::to_string(i) + "]': expected an index");
      }
      parsed_perm.push_back(perm[i].get<std::size_t>());
    }
    try {
      sys = IntervalSystem::interval_exchange(std::move(parsed_lengths), std::move(parsed_perm));
    } catch (const std::invalid_argument& e) {
      throw ParseError(std::string("interval_exchange: ") + e.what());
    }
  } else {
    throw ParseError("unknown system type '" + kind + "'");
  }
  desc.system = std::move(sys);
  if (j.contains("observable")) {
    const Json& name = j.at("observable");
    if (!name.is_string()) throw ParseError("field 'observable': expected an observable name");
    try {
      desc.interval_observable = named_observable(name.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ParseError(std::string("field 'observable': ") + e.what());
    }
  }
  return desc;
}

inline SystemDescription load_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open system file '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw ParseError("malformed JSON in '" + path + "': " + e.what());
  }
  return system_from_json(j);
}

/// Canonical text form: sorted keys, two-space indent, trailing newline.
inline std::string canonical_dump(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Reports

inline Json report_to_json(const VerificationReport& rep) {
  Json j;
  j["check"] = rep.check;
  j["system"] = rep.system;
  j["mode"] = rep.mode;
  j["status"] = rep.status;
  j["verdict"] = rep.pass ? "pass" : "fail";
  if (!rep.params.empty()) j["params"] = rep.params;
  if (rep.exact_value) j["value"] = format_rational(*rep.exact_value);
  if (rep.estimate) j["estimate"] = *rep.estimate;
  if (rep.std_error) j["stderr"] = *rep.std_error;
  if (!rep.rows.empty()) {
    Json rows = Json::array();
    for (const auto& row : rep.rows) rows.push_back(row);
    j["rows"] = std::move(rows);
  }
  if (!rep.detail.empty()) j["detail"] = rep.detail;
  return j;
}

/// CSV: one row per sweep/trial point when the report has rows, otherwise a
/// single summary row.
inline std::string report_to_csv(const VerificationReport& rep) {
  std::ostringstream out;
  if (rep.rows.empty()) {
    out << "check,system,mode,status,verdict,value,estimate,stderr\n";
    out << rep.check << ',' << rep.system << ',' << rep.mode << ',' << rep.status << ','
        << (rep.pass ? "pass" : "fail") << ','
        << (rep.exact_value ? format_rational(*rep.exact_value) : "") << ','
        << (rep.estimate ? to_decimal_string(Rational(*rep.estimate)) : "") << ','
        << (rep.std_error ? to_decimal_string(Rational(*rep.std_error)) : "") << '\n';
    return out.str();
  }
  std::vector<std::string> keys;
  for (const auto& [key, value] : rep.rows.front()) keys.push_back(key);
  out << "check,verdict";
  for (const std::string& key : keys) out << ',' << key;
  out << '\n';
  for (const auto& row : rep.rows) {
    out << rep.check << ',' << (rep.pass ? "pass" : "fail");
    for (const std::string& key : keys) {
      const auto it = row.find(key);
      out << ',' << (it == row.end() ? "" : it->second);
    }
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Decompositions

inline Json decomposition_to_json(const ExactDecomposition& dec, const std::string& x_label,
                                  bool include_terms = true) {
  Json j;
  j["m"] = dec.horizon;
  j["N"] = dec.window;
  j["x"] = x_label;
  j["lambda"] = format_rational(dec.lambda_value);
  j["tail_start"] = dec.tail_start;
  j["tail_sum"] = format_rational(dec.tail_sum());
  j["total_sum"] = format_rational(dec.total_sum());
  Json segments = Json::array();
  for (const Segment<Rational>& seg : dec.segments) {
    Json s;
    s["kind"] = seg.kind == SegmentKind::block ? "block" : "zero_run";
    s["start"] = seg.start;
    s["length"] = seg.length;
    if (seg.kind == SegmentKind::block) s["sum"] = format_rational(seg.sum);
    segments.push_back(std::move(s));
  }
  j["segments"] = std::move(segments);
  if (include_terms) {
    Json terms = Json::array();
    for (const Rational& t : dec.terms) terms.push_back(format_rational(t));
    j["terms"] = std::move(terms);
    Json member = Json::array();
    for (char flag : dec.member) member.push_back(flag != 0);
    j["member"] = std::move(member);
  }
  return j;
}

inline Json decomposition_to_json(const SampledDecomposition& dec, const std::string& x_label,
                                  bool include_terms = true) {
  Json j;
  j["m"] = dec.horizon;
  j["N"] = dec.window;
  j["x"] = x_label;
  j["lambda"] = dec.lambda_value;
  j["tail_start"] = dec.tail_start;
  j["tail_sum"] = dec.tail_sum();
  j["total_sum"] = dec.total_sum();
  Json segments = Json::array();
  for (const Segment<double>& seg : dec.segments) {
    Json s;
    s["kind"] = seg.kind == SegmentKind::block ? "block" : "zero_run";
    s["start"] = seg.start;
    s["length"] = seg.length;
    if (seg.kind == SegmentKind::block) s["sum"] = seg.sum;
    segments.push_back(std::move(s));
  }
  j["segments"] = std::move(segments);
  if (include_terms) {
    j["terms"] = dec.terms;
    Json member = Json::array();
    for (char flag : dec.member) member.push_back(flag != 0);
    j["member"] = std::move(member);
  }
  return j;
}

}  // namespace ergo

#endif  // ERGO_IO_HPP
