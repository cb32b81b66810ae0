// Walk through the string decomposition of an orbit sum: zero-runs where
// the orbit leaves the level set, positive-sum blocks of bounded length
// where it enters, and a short certified tail.

#include <iostream>

#include "ergo/decomposition.hpp"
#include "ergo/io.hpp"

int main() {
  using namespace ergo;

  const FiniteSystem swap = make_cycle(2);
  const FiniteObservable f = make_observable({Rational(2, 5), Rational(4, 5)});
  const FiniteObservable lam = constant_observable(2, Rational(1, 2));

  const ExactDecomposition dec = decompose(swap, f, lam, 0, /*N=*/2, /*m=*/5);
  std::cout << canonical_dump(decomposition_to_json(dec, "0"));

  const CertificateResult cert = verify_decomposition(dec, swap, f, lam, 0);
  const TailBound<Rational> tail = tail_bound_check(dec, f);
  std::cout << "certificate: " << (cert.ok ? "pass" : cert.failure) << "\n";
  std::cout << "tail " << format_rational(tail.tail_sum) << " >= bound "
            << format_rational(tail.bound) << ": " << (tail.ok ? "yes" : "no") << "\n";
  return 0;
}
