// Finite measure-preserving systems: a weighted point set with a self-map.
//
// The measure of a point set is the sum of its weights; T preserves the
// measure iff for every point j the total weight of its preimages equals
// w(j). All checks here are exact rational comparisons with zero tolerance.
//
// Structure facts used downstream:
//  * every orbit is eventually periodic with preperiod t and period p,
//    t + p <= n;
//  * weights are constant along cycles, and points not on a cycle carry
//    weight 0 (both forced by measure preservation).

#ifndef ERGO_FINITE_SYSTEM_HPP
#define ERGO_FINITE_SYSTEM_HPP

#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ergo/observable.hpp"
#include "ergo/rational.hpp"
#include "ergo/rng.hpp"

namespace ergo {

struct FiniteSystem {
  std::vector<Rational> weights;   // probability masses, sum exactly 1
  std::vector<std::size_t> map;    // map[i] = image of point i

  std::size_t size() const { return map.size(); }
  std::size_t step(std::size_t x) const { return map[x]; }
};

struct ValidationResult {
  bool ok = true;
  std::optional<std::size_t> first_bad_point;
  std::string reason;
};

namespace detail {

inline std::vector<bool> periodic_points(const std::vector<std::size_t>& map) {
  const std::size_t n = map.size();
  // A point is periodic iff its forward orbit returns to it.
  std::vector<bool> periodic(n, false);
  std::vector<std::uint8_t> state(n, 0);  // 0 unvisited, 1 on stack, 2 done
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < n; ++start) {
    if (state[start] != 0) continue;
    stack.clear();
    std::size_t y = start;
    while (state[y] == 0) {
      state[y] = 1;
      stack.push_back(y);
      y = map[y];
    }
    if (state[y] == 1) {
      // Closed the loop inside this walk: everything from y onwards is a cycle.
      for (std::size_t k = stack.size(); k-- > 0;) {
        periodic[stack[k]] = true;
        if (stack[k] == y) break;
      }
    }
    for (std::size_t v : stack) state[v] = 2;
  }
  return periodic;
}

}  // namespace detail

/// Exact validation of the measure-preservation invariants. On failure,
/// reports the first violated point index (in point order).
inline ValidationResult validate(const FiniteSystem& sys) {
  const std::size_t n = sys.size();
  if (sys.weights.size() != n) {
    return {false, std::nullopt, "weights and map have different lengths"};
  }
  if (n == 0) {
    return {false, std::nullopt, "system has no points"};
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (sys.map[i] >= n) {
      return {false, i, "map image out of range at point " + std::to_string(i)};
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (sys.weights[i] < 0) {
      return {false, i, "negative weight at point " + std::to_string(i)};
    }
  }
  Rational total(0);
  for (const Rational& w : sys.weights) total += w;
  if (total != 1) {
    return {false, std::nullopt, "weights sum to " + format_rational(total) + ", expected 1"};
  }
  std::vector<Rational> incoming(n, Rational(0));
  for (std::size_t i = 0; i < n; ++i) incoming[sys.map[i]] += sys.weights[i];
  for (std::size_t j = 0; j < n; ++j) {
    if (incoming[j] != sys.weights[j]) {
      return {false, j,
              "preimage mass " + format_rational(incoming[j]) + " != weight " +
                  format_rational(sys.weights[j]) + " at point " + std::to_string(j)};
    }
  }
  // Post-pass: non-periodic points must carry weight 0. This is a consequence
  // of the checks above, so a hit here means an internal inconsistency.
  const std::vector<bool> periodic = detail::periodic_points(sys.map);
  for (std::size_t i = 0; i < n; ++i) {
    if (!periodic[i] && sys.weights[i] != 0) {
      return {false, i, "transient point " + std::to_string(i) + " carries positive weight"};
    }
  }
  return {};
}

/// Uniform n-cycle: weights 1/n, map i -> i+1 mod n.
inline FiniteSystem make_cycle(std::size_t n) {
  if (n == 0) throw std::invalid_argument("make_cycle: n must be positive");
  FiniteSystem sys;
  sys.weights.assign(n, Rational(1, static_cast<unsigned long>(n)));
  sys.map.resize(n);
  for (std::size_t i = 0; i < n; ++i) sys.map[i] = (i + 1) % n;
  return sys;
}

/// Random measure-preserving system. Mixes random permutations (weights
/// constant on each cycle, drawn as integers over a common denominator
/// <= 2^16) with non-invertible maps that hang zero-weight transient points
/// off the permuted core. Deterministic in the seed.
inline FiniteSystem make_random_preserving(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("make_random_preserving: n must be positive");
  Rng rng(seed);
  if (n == 1) return FiniteSystem{{Rational(1)}, {0}};

  const bool invertible = rng.coin();
  const std::size_t core = invertible ? n : 1 + static_cast<std::size_t>(rng.below(n - 1));

  std::vector<std::size_t> perm(core);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  rng.shuffle(perm);

  constexpr std::size_t kNoCycle = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> cycle_id(core, kNoCycle);
  std::vector<std::uint64_t> cycle_len;
  for (std::size_t i = 0; i < core; ++i) {
    if (cycle_id[i] != kNoCycle) continue;
    const std::size_t id = cycle_len.size();
    std::uint64_t len = 0;
    for (std::size_t j = i; cycle_id[j] == kNoCycle; j = perm[j]) {
      cycle_id[j] = id;
      ++len;
    }
    cycle_len.push_back(len);
  }

  // One mass per cycle; occasional zero-mass cycles keep the w >= 0 edge
  // cases exercised. Common denominator stays below 2^16.
  const std::size_t cycles = cycle_len.size();
  std::vector<std::uint64_t> mass(cycles);
  std::uint64_t denom = 0;
  for (std::size_t c = 0; c < cycles; ++c) {
    mass[c] = rng.below(8) == 0 ? 0 : 1 + rng.below(1023);
    denom += cycle_len[c] * mass[c];
  }
  if (denom == 0) {
    const std::size_t c = static_cast<std::size_t>(rng.below(cycles));
    mass[c] = 1;
    denom = cycle_len[c];
  }

  std::vector<std::size_t> raw_map(n);
  std::vector<Rational> raw_weights(n, Rational(0));
  for (std::size_t i = 0; i < core; ++i) {
    raw_map[i] = perm[i];
    raw_weights[i] = Rational(static_cast<unsigned long long>(mass[cycle_id[i]]),
                              static_cast<unsigned long long>(denom));
  }
  for (std::size_t i = core; i < n; ++i) {
    raw_map[i] = static_cast<std::size_t>(rng.below(i));  // strictly earlier point
  }

  // Conjugate by a random relabeling so transient points land anywhere.
  std::vector<std::size_t> relabel(n);
  std::iota(relabel.begin(), relabel.end(), std::size_t{0});
  rng.shuffle(relabel);
  FiniteSystem sys;
  sys.weights.resize(n);
  sys.map.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    sys.map[relabel[i]] = relabel[raw_map[i]];
    sys.weights[relabel[i]] = raw_weights[i];
  }
  return sys;
}

/// Orbit segment (x, Tx, ..., T^{m-1}x).
inline std::vector<std::size_t> orbit(const FiniteSystem& sys, std::size_t x, std::size_t m) {
  if (x >= sys.size()) throw std::invalid_argument("orbit: point out of range");
  if (m == 0) throw std::invalid_argument("orbit: m must be positive");
  std::vector<std::size_t> out;
  out.reserve(m);
  out.push_back(x);
  for (std::size_t k = 1; k < m; ++k) out.push_back(sys.map[out.back()]);
  return out;
}

struct OrbitShape {
  std::size_t preperiod = 0;  // t: steps before entering the terminal cycle
  std::size_t period = 0;     // p: terminal cycle length
  std::vector<std::size_t> points;  // the first t + p orbit points
};

inline OrbitShape orbit_shape(const FiniteSystem& sys, std::size_t x) {
  if (x >= sys.size()) throw std::invalid_argument("orbit_shape: point out of range");
  constexpr std::size_t kUnseen = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> first_seen(sys.size(), kUnseen);
  OrbitShape shape;
  std::size_t y = x;
  std::size_t step = 0;
  while (first_seen[y] == kUnseen) {
    first_seen[y] = step++;
    shape.points.push_back(y);
    y = sys.map[y];
  }
  shape.preperiod = first_seen[y];
  shape.period = step - first_seen[y];
  return shape;
}

/// Grand-orbit component ids (weakly connected components of the functional
/// graph), numbered densely in first-occurrence order.
inline std::vector<std::size_t> component_ids(const FiniteSystem& sys) {
  const std::size_t n = sys.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  const auto find = [&](std::size_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = find(i);
    const std::size_t b = find(sys.map[i]);
    if (a != b) parent[a] = b;
  }
  constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> id(n, kUnset);
  std::size_t next_id = 0;
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = find(i);
    if (id[root] == kUnset) id[root] = next_id++;
    out[i] = id[root];
  }
  return out;
}

/// Invariance lam(Tx) = lam(x) at every positive-weight point (exact).
inline bool is_invariant(const FiniteSystem& sys, const FiniteObservable& lam) {
  if (lam.values.size() != sys.size()) {
    throw std::invalid_argument("is_invariant: observable size mismatch");
  }
  for (std::size_t x = 0; x < sys.size(); ++x) {
    if (sys.weights[x] > 0 && lam.values[sys.map[x]] != lam.values[x]) return false;
  }
  return true;
}

/// Random invariant observable: one rational value per grand orbit, so the
/// result is constant along every orbit (not merely a.e.). |values| <= 8.
inline FiniteObservable make_invariant(const FiniteSystem& sys, std::uint64_t seed) {
  const std::vector<std::size_t> comp = component_ids(sys);
  std::size_t ncomp = 0;
  for (std::size_t c : comp) ncomp = std::max(ncomp, c + 1);
  const Rng master(seed);
  std::vector<Rational> comp_value(ncomp);
  for (std::size_t c = 0; c < ncomp; ++c) {
    Rng r = master.substream(c);
    const auto den = static_cast<std::int64_t>(1 + r.below(16));
    const std::int64_t num = r.range(-8 * den, 8 * den);
    comp_value[c] = Rational(static_cast<long long>(num), static_cast<long long>(den));
  }
  std::vector<Rational> values(sys.size());
  for (std::size_t i = 0; i < sys.size(); ++i) values[i] = comp_value[comp[i]];
  return make_observable(std::move(values));
}

/// Random observable with |values| <= max_abs and declared bound max_abs.
inline FiniteObservable random_observable(const FiniteSystem& sys, std::uint64_t seed,
                                          long max_abs = 8) {
  if (max_abs <= 0) throw std::invalid_argument("random_observable: max_abs must be positive");
  const Rng master(seed);
  std::vector<Rational> values(sys.size());
  for (std::size_t i = 0; i < sys.size(); ++i) {
    Rng r = master.substream(i);
    const auto den = static_cast<std::int64_t>(1 + r.below(256));
    const std::int64_t num = r.range(-max_abs * den, max_abs * den);
    values[i] = Rational(static_cast<long long>(num), static_cast<long long>(den));
  }
  return FiniteObservable{std::move(values), Rational(max_abs)};
}

// ---------------------------------------------------------------------------
// Doubling-map grid: residues {1/q, ..., (q-1)/q} for odd q form a finite
// system on which x -> 2x mod 1 acts as a permutation with uniform mass.

struct DoublingGrid {
  FiniteSystem system;
  std::vector<Rational> points;  // points[i] = (i+1)/q
};

inline DoublingGrid make_doubling_grid(std::uint64_t q) {
  if (q < 3 || q % 2 == 0) {
    throw std::invalid_argument("make_doubling_grid: q must be odd and >= 3");
  }
  DoublingGrid grid;
  const std::size_t n = static_cast<std::size_t>(q - 1);
  grid.system.weights.assign(n, Rational(1ull, q - 1));
  grid.system.map.resize(n);
  grid.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t r = i + 1;
    grid.system.map[i] = static_cast<std::size_t>((2 * r) % q - 1);
    grid.points[i] = Rational(r, q);
  }
  return grid;
}

inline FiniteObservable sample_on_grid(const DoublingGrid& grid, const IntervalObservable& obs) {
  if (!obs.exact_value) {
    throw std::invalid_argument("sample_on_grid: observable '" + obs.name +
                                "' has no exact evaluator");
  }
  std::vector<Rational> values;
  values.reserve(grid.points.size());
  for (const Rational& x : grid.points) values.push_back(obs.exact_value(x));
  return make_observable(std::move(values));
}

}  // namespace ergo

#endif  // ERGO_FINITE_SYSTEM_HPP
