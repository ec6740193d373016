#pragma once
// Exact algebra of polyhomogeneous index sets: finitely generated subsets of
// C x N that are closed under integer exponent shifts and log-order decrease.
// Exponents are Gaussian rationals so every real-part comparison is exact.

#include <boost/multiprecision/cpp_int.hpp>
#include <compare>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace phg {

using Rat = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Error type for all contract violations surfaced to callers.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Largest integer <= r.
BigInt ratFloor(const Rat& r);
// r - floor(r), in [0,1).
Rat ratFrac(const Rat& r);
// Canonical text form "p/q" (or "p" when q == 1).
std::string ratToString(const Rat& r);

// Exponent alpha = re + im*i with exact rational parts.
struct ComplexExact {
  Rat re;
  Rat im;

  ComplexExact() = default;
  ComplexExact(Rat r, Rat i = 0) : re(std::move(r)), im(std::move(i)) {}

  ComplexExact operator+(const ComplexExact& o) const { return {re + o.re, im + o.im}; }
  ComplexExact operator-(const ComplexExact& o) const { return {re - o.re, im - o.im}; }
  ComplexExact operator-() const { return {-re, -im}; }
  ComplexExact conj() const { return {re, -im}; }
  bool operator==(const ComplexExact& o) const { return re == o.re && im == o.im; }
  bool operator!=(const ComplexExact& o) const { return !(*this == o); }
  // Deterministic (re, im) lexicographic order used for canonical output.
  bool operator<(const ComplexExact& o) const {
    if (re != o.re) return re < o.re;
    return im < o.im;
  }
  std::string str() const;  // e.g. "1/2", "1+1i", "-1/2-3i"
};

// One element (alpha, l): exponent alpha with log order l.
struct Generator {
  ComplexExact alpha;
  int l = 0;

  Generator() = default;
  Generator(ComplexExact a, int logOrder) : alpha(std::move(a)), l(logOrder) {
    if (l < 0) throw Error("generator log order must be nonnegative");
  }
  bool operator==(const Generator& o) const { return alpha == o.alpha && l == o.l; }
  bool operator<(const Generator& o) const {
    if (!(alpha == o.alpha)) return alpha < o.alpha;
    return l < o.l;
  }
  std::string str() const;  // "(1/2,0)"
};

// An index set in canonical form: the minimal antichain of generators, sorted
// by (re, im, l). The empty antichain is the distinguished value INF (the
// empty set, i.e. infinite-order vanishing).
class IndexSet {
public:
  IndexSet() = default;  // INF

  static IndexSet inf() { return IndexSet(); }
  // N = {(0,0)}: the index set of smooth functions.
  static IndexSet nat();
  // Normalizes an arbitrary generator list to the minimal antichain.
  static IndexSet fromGenerators(std::vector<Generator> gens);

  bool isInf() const { return gens_.empty(); }
  const std::vector<Generator>& generators() const { return gens_; }

  bool operator==(const IndexSet& o) const { return gens_ == o.gens_; }
  bool operator!=(const IndexSet& o) const { return !(*this == o); }

  // Membership in the closure. INF contains nothing.
  bool contains(const Generator& g) const;
  // Max log order at exponent z, or -1 if z is not in the closure.
  int maxLogAt(const ComplexExact& z) const;

  // min Re over the set; throws on INF.
  Rat infRe() const;
  // Vacuously true on INF.
  bool reGreaterThan(const Rat& c) const;
  bool reGreaterEqual(const Rat& c) const;

  // Pointwise sum {(a+b, l+l')}; INF absorbs.
  IndexSet sum(const IndexSet& o) const;
  // All generators shifted by c; INF fixed.
  IndexSet shift(const ComplexExact& c) const;
  IndexSet shift(const Rat& c) const { return shift(ComplexExact(c)); }
  // Complex conjugation of exponents.
  IndexSet conjugate() const;
  // Closure of the elements with Re > lambda.
  IndexSet truncateAbove(const Rat& lambda) const;
  // Deletes the pairs (m, l) for every l, then re-closes. Only generators
  // sitting exactly at m move (to m+1); pairs at m implied by generators
  // strictly below re-appear under re-closure, so they stay.
  IndexSet removeLeading(const ComplexExact& m) const;
  // Divide exponents by e >= 1 (log orders kept), closing up again: the
  // result is generated by (alpha+k)/e for k = 0..e-1.
  IndexSet divideExponents(int e) const;

  // Minimal antichain of the closure elements in the window
  // [infRe, infRe+1). Throws on INF.
  std::vector<Generator> leadingSet() const;
  // All closure elements with Re <= M, sorted by (Re, Im, l).
  std::vector<Generator> enumerateUpTo(const Rat& M) const;

  std::string str() const;  // "{(0,0),(1/2,1)}" or "INF"

private:
  std::vector<Generator> gens_;
};

// n-ary extended union: the closure of the union, enlarged by the pairs
// (z, p_1 + ... + p_k + 1) for every z lying in the closure of all operands,
// where p_i is the maximal log order of z in the i-th operand. An INF operand
// empties the common part, so EU(E, INF) = E.
IndexSet extendedUnion(const std::vector<IndexSet>& sets);
IndexSet extendedUnion(const IndexSet& a, const IndexSet& b);

// Sum of several sets (empty list yields N = {(0,0)}, the neutral element).
IndexSet sumAll(const std::vector<IndexSet>& sets);

// Extended union of the closures of {(mu_i, M_i)}. Also reports, per input
// root, Mtilde = max log order at mu_i in the result (integer-spaced roots
// raise each other's log orders).
struct SimpleSetResult {
  IndexSet set;
  std::vector<int> mTilde;  // aligned with the input pairs
};
SimpleSetResult simpleSetFromRoots(const std::vector<std::pair<ComplexExact, int>>& roots);

}  // namespace phg
