#pragma once
// Brute-force oracles for the index-set operations, used by property tests
// and the acceptance suite. Everything here works on explicit enumerations of
// closure elements up to a real-part bound and never calls the symbolic
// implementations of sum / extended union / truncation.

#include <algorithm>
#include <random>
#include <vector>

#include "phg/index_set.hpp"

namespace phg::oracle {

using Pairs = std::vector<Generator>;  // explicit closure elements

inline Pairs sortedUnique(Pairs p) {
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  return p;
}

// Closure elements of the set generated by `gens`, up to Re <= M.
inline Pairs enumerate(const std::vector<Generator>& gens, const Rat& M) {
  Pairs out;
  for (const auto& g : gens) {
    if (g.alpha.re > M) continue;
    BigInt kmax = ratFloor(M - g.alpha.re);
    for (BigInt k = 0; k <= kmax; ++k)
      for (int l = 0; l <= g.l; ++l)
        out.emplace_back(ComplexExact(g.alpha.re + Rat(k), g.alpha.im), l);
  }
  return sortedUnique(std::move(out));
}

inline Pairs enumerate(const IndexSet& e, const Rat& M) {
  return enumerate(e.generators(), M);
}

// Brute-force pointwise sum, enumerated up to M. Each factor is enumerated far
// enough that no sum below the bound is missed.
inline Pairs sum(const IndexSet& a, const IndexSet& b, const Rat& M) {
  if (a.isInf() || b.isInf()) return {};
  Pairs ea = enumerate(a, M - b.infRe());
  Pairs eb = enumerate(b, M - a.infRe());
  Pairs out;
  for (const auto& x : ea)
    for (const auto& y : eb) {
      ComplexExact z = x.alpha + y.alpha;
      if (z.re <= M) out.emplace_back(z, x.l + y.l);
    }
  return sortedUnique(std::move(out));
}

// Brute-force n-ary extended union, enumerated up to M: the union of the
// enumerations plus, when no operand is empty, the pairs (z, sum of max logs
// + 1) at every exponent common to all operands, closed downward in log
// order.
inline Pairs extendedUnion(const std::vector<IndexSet>& sets, const Rat& M) {
  std::vector<Pairs> enums;
  bool anyInf = false;
  for (const auto& e : sets) {
    anyInf = anyInf || e.isInf();
    enums.push_back(enumerate(e, M));
  }
  Pairs out;
  for (const auto& en : enums) out.insert(out.end(), en.begin(), en.end());
  if (!anyInf && sets.size() > 1) {
    auto maxLog = [](const Pairs& en, const ComplexExact& z) {
      int best = -1;
      for (const auto& g : en)
        if (g.alpha == z) best = std::max(best, g.l);
      return best;
    };
    // Candidate exponents: everything that occurs anywhere below the bound.
    Pairs all = sortedUnique(out);
    std::vector<ComplexExact> zs;
    for (const auto& g : all)
      if (zs.empty() || !(zs.back() == g.alpha)) zs.push_back(g.alpha);
    for (const auto& z : zs) {
      int total = 0;
      bool common = true;
      for (const auto& en : enums) {
        int p = maxLog(en, z);
        if (p < 0) {
          common = false;
          break;
        }
        total += p;
      }
      if (common)
        for (int l = 0; l <= total + 1; ++l) out.emplace_back(z, l);
    }
  }
  return sortedUnique(std::move(out));
}

// ---- the same operations on explicit enumerations -------------------------
// These let a whole composition formula be evaluated in the enumerated world,
// never touching the symbolic sum / extended union. An empty enumeration is
// read as INF (callers keep the working bound high enough that every non-INF
// operand has an element below it).

inline Pairs sumP(const Pairs& a, const Pairs& b, const Rat& W) {
  Pairs out;
  for (const auto& x : a)
    for (const auto& y : b) {
      ComplexExact z = x.alpha + y.alpha;
      if (z.re <= W) out.emplace_back(z, x.l + y.l);
    }
  return sortedUnique(std::move(out));
}

inline Pairs shiftP(const Pairs& a, const Rat& c, const Rat& W) {
  Pairs out;
  for (const auto& x : a) {
    ComplexExact z = x.alpha + ComplexExact(c);
    if (z.re <= W) out.emplace_back(z, x.l);
  }
  return sortedUnique(std::move(out));
}

inline Pairs euP(const std::vector<Pairs>& ops) {
  Pairs out;
  bool anyInf = false;
  for (const auto& p : ops) {
    anyInf = anyInf || p.empty();
    out.insert(out.end(), p.begin(), p.end());
  }
  if (!anyInf && ops.size() > 1) {
    auto maxLog = [](const Pairs& en, const ComplexExact& z) {
      int best = -1;
      for (const auto& g : en)
        if (g.alpha == z) best = std::max(best, g.l);
      return best;
    };
    Pairs all = sortedUnique(out);
    std::vector<ComplexExact> zs;
    for (const auto& g : all)
      if (zs.empty() || !(zs.back() == g.alpha)) zs.push_back(g.alpha);
    for (const auto& z : zs) {
      int total = 0;
      bool common = true;
      for (const auto& en : ops) {
        int p = maxLog(en, z);
        if (p < 0) {
          common = false;
          break;
        }
        total += p;
      }
      if (common)
        for (int l = 0; l <= total + 1; ++l) out.emplace_back(z, l);
    }
  }
  return sortedUnique(std::move(out));
}

// Minimal antichain of the window [min Re, min Re + 1): per exponent the
// maximal log order. Empty input stays empty.
inline Pairs leadP(const Pairs& a) {
  if (a.empty()) return {};
  Rat r0 = a.front().alpha.re;
  for (const auto& g : a) r0 = std::min(r0, g.alpha.re);
  std::vector<std::pair<ComplexExact, int>> best;
  for (const auto& g : a) {
    if (!(g.alpha.re < r0 + 1)) continue;
    bool found = false;
    for (auto& [z, l] : best)
      if (z == g.alpha) {
        l = std::max(l, g.l);
        found = true;
      }
    if (!found) best.emplace_back(g.alpha, g.l);
  }
  Pairs out;
  for (const auto& [z, l] : best) out.emplace_back(z, l);
  return sortedUnique(std::move(out));
}

// Keep only the elements with Re <= M (for comparing against enumerateUpTo).
inline Pairs clampP(const Pairs& a, const Rat& M) {
  Pairs out;
  for (const auto& g : a)
    if (g.alpha.re <= M) out.push_back(g);
  return sortedUnique(std::move(out));
}

// Random small index sets for property tests: a few generators with
// denominators in {1,2,3,4}, small imaginary parts, log order <= 2.
struct RandomSets {
  std::mt19937 rng;
  explicit RandomSets(unsigned seed) : rng(seed) {}

  Rat smallRat() {
    static const int dens[] = {1, 1, 2, 2, 3, 4};
    int d = dens[rng() % 6];
    int p = static_cast<int>(rng() % (6 * d + 1)) - 3 * d;
    return Rat(p, d);
  }

  ComplexExact exponent(bool realOnly) {
    Rat im = 0;
    if (!realOnly) {
      switch (rng() % 6) {
        case 0: im = 1; break;
        case 1: im = -1; break;
        case 2: im = Rat(1, 2); break;
        default: break;
      }
    }
    return ComplexExact(smallRat(), im);
  }

  IndexSet indexSet(bool realOnly = false, bool allowInf = true) {
    if (allowInf && rng() % 10 == 0) return IndexSet::inf();
    int count = 1 + static_cast<int>(rng() % 3);
    std::vector<Generator> gens;
    for (int i = 0; i < count; ++i)
      gens.emplace_back(exponent(realOnly), static_cast<int>(rng() % 3));
    return IndexSet::fromGenerators(std::move(gens));
  }
};

}  // namespace phg::oracle
