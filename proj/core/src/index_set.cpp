#include "phg/index_set.hpp"

#include <algorithm>
#include <map>

namespace phg {

BigInt ratFloor(const Rat& r) {
  BigInt n = numerator(r);
  BigInt d = denominator(r);  // > 0 in canonical form
  BigInt q = n / d;
  if (n < 0 && q * d != n) --q;
  return q;
}

Rat ratFrac(const Rat& r) { return r - Rat(ratFloor(r)); }

std::string ratToString(const Rat& r) {
  std::string s = numerator(r).str();
  if (denominator(r) != 1) s += "/" + denominator(r).str();
  return s;
}

std::string ComplexExact::str() const {
  if (im == 0) return ratToString(re);
  std::string s = ratToString(re);
  if (im > 0) s += "+";
  s += ratToString(im) + "i";
  return s;
}

std::string Generator::str() const {
  return "(" + alpha.str() + "," + std::to_string(l) + ")";
}

namespace {

// True when h implies g under the closure order: same residue line, g sits a
// nonnegative integer above h with no higher log order.
bool implies(const Generator& h, const Generator& g) {
  if (h.alpha.im != g.alpha.im) return false;
  if (g.l > h.l) return false;
  Rat d = g.alpha.re - h.alpha.re;
  return d >= 0 && denominator(d) == 1;
}

}  // namespace

IndexSet IndexSet::nat() { return fromGenerators({Generator(ComplexExact(0), 0)}); }

IndexSet IndexSet::fromGenerators(std::vector<Generator> gens) {
  std::sort(gens.begin(), gens.end());
  gens.erase(std::unique(gens.begin(), gens.end()), gens.end());
  std::vector<Generator> keep;
  for (size_t i = 0; i < gens.size(); ++i) {
    // After dedup, distinct generators never imply each other mutually, so
    // dropping every implied one leaves exactly the minimal antichain.
    bool redundant = false;
    for (size_t j = 0; j < gens.size() && !redundant; ++j)
      redundant = (i != j) && implies(gens[j], gens[i]);
    if (!redundant) keep.push_back(gens[i]);
  }
  IndexSet e;
  e.gens_ = std::move(keep);
  return e;
}

bool IndexSet::contains(const Generator& g) const {
  for (const auto& h : gens_)
    if (implies(h, g)) return true;
  return false;
}

int IndexSet::maxLogAt(const ComplexExact& z) const {
  int best = -1;
  for (const auto& h : gens_) {
    if (h.alpha.im != z.im) continue;
    Rat d = z.re - h.alpha.re;
    if (d >= 0 && denominator(d) == 1) best = std::max(best, h.l);
  }
  return best;
}

Rat IndexSet::infRe() const {
  if (isInf()) throw Error("infRe: INF has no infimum");
  Rat m = gens_.front().alpha.re;
  for (const auto& g : gens_) m = std::min(m, g.alpha.re);
  return m;
}

bool IndexSet::reGreaterThan(const Rat& c) const {
  return isInf() || infRe() > c;
}

bool IndexSet::reGreaterEqual(const Rat& c) const {
  return isInf() || infRe() >= c;
}

IndexSet IndexSet::sum(const IndexSet& o) const {
  if (isInf() || o.isInf()) return inf();
  std::vector<Generator> out;
  out.reserve(gens_.size() * o.gens_.size());
  for (const auto& a : gens_)
    for (const auto& b : o.gens_)
      out.emplace_back(a.alpha + b.alpha, a.l + b.l);
  return fromGenerators(std::move(out));
}

IndexSet IndexSet::shift(const ComplexExact& c) const {
  std::vector<Generator> out = gens_;
  for (auto& g : out) g.alpha = g.alpha + c;
  return fromGenerators(std::move(out));
}

IndexSet IndexSet::conjugate() const {
  std::vector<Generator> out = gens_;
  for (auto& g : out) g.alpha = g.alpha.conj();
  return fromGenerators(std::move(out));
}

IndexSet IndexSet::truncateAbove(const Rat& lambda) const {
  std::vector<Generator> out;
  for (const auto& g : gens_) {
    if (g.alpha.re > lambda) {
      out.push_back(g);
    } else {
      // Smallest integer shift k with Re + k > lambda.
      Rat k = Rat(ratFloor(lambda - g.alpha.re)) + 1;
      out.emplace_back(ComplexExact(g.alpha.re + k, g.alpha.im), g.l);
    }
  }
  return fromGenerators(std::move(out));
}

IndexSet IndexSet::removeLeading(const ComplexExact& m) const {
  std::vector<Generator> out;
  for (const auto& g : gens_) {
    if (g.alpha == m) {
      out.emplace_back(ComplexExact(g.alpha.re + 1, g.alpha.im), g.l);
    } else {
      out.push_back(g);
    }
  }
  return fromGenerators(std::move(out));
}

IndexSet IndexSet::divideExponents(int e) const {
  if (e < 1) throw Error("divideExponents: divisor must be >= 1");
  if (e == 1 || isInf()) return *this;
  std::vector<Generator> out;
  for (const auto& g : gens_)
    for (int k = 0; k < e; ++k)
      out.emplace_back(ComplexExact((g.alpha.re + k) / e, g.alpha.im / e), g.l);
  return fromGenerators(std::move(out));
}

std::vector<Generator> IndexSet::leadingSet() const {
  Rat lo = infRe();  // throws on INF
  std::vector<Generator> out;
  for (const auto& g : gens_)
    if (g.alpha.re < lo + 1) out.push_back(g);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Generator> IndexSet::enumerateUpTo(const Rat& M) const {
  std::vector<Generator> out;
  for (const auto& g : gens_) {
    if (g.alpha.re > M) continue;
    BigInt kmax = ratFloor(M - g.alpha.re);
    for (BigInt k = 0; k <= kmax; ++k)
      for (int l = 0; l <= g.l; ++l)
        out.emplace_back(ComplexExact(g.alpha.re + Rat(k), g.alpha.im), l);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string IndexSet::str() const {
  if (isInf()) return "INF";
  std::string s = "{";
  for (size_t i = 0; i < gens_.size(); ++i) {
    if (i) s += ",";
    s += gens_[i].str();
  }
  return s + "}";
}

IndexSet extendedUnion(const std::vector<IndexSet>& sets) {
  if (sets.empty()) throw Error("extendedUnion: needs at least one operand");
  std::vector<Generator> out;
  bool anyInf = false;
  for (const auto& e : sets) {
    anyInf = anyInf || e.isInf();
    for (const auto& g : e.generators()) out.push_back(g);
  }
  if (!anyInf && sets.size() > 1) {
    // Extension part: group generators by residue line (im, frac(re)). A line
    // common to every operand contributes (z, sum of max logs + 1) from
    // z_start = max over operands of the line's minimal Re. The log sum only
    // jumps at generator exponents, so those are the only candidates needed.
    using Key = std::pair<Rat, Rat>;  // (im, frac(re))
    struct Line {
      size_t opsPresent = 0;
      Rat zStart;           // max over operands of min Re on this line
      std::vector<Rat> res; // candidate Re values (generator positions)
    };
    std::map<Key, Line> lines;
    for (const auto& e : sets) {
      std::map<Key, Rat> minRe;
      for (const auto& g : e.generators()) {
        Key k{g.alpha.im, ratFrac(g.alpha.re)};
        auto it = minRe.find(k);
        if (it == minRe.end() || g.alpha.re < it->second) minRe[k] = g.alpha.re;
      }
      for (auto& [k, m] : minRe) {
        Line& ln = lines[k];
        if (ln.opsPresent == 0 || m > ln.zStart) ln.zStart = m;
        ln.opsPresent++;
      }
    }
    for (const auto& e : sets)
      for (const auto& g : e.generators()) {
        Key k{g.alpha.im, ratFrac(g.alpha.re)};
        lines[k].res.push_back(g.alpha.re);
      }
    for (auto& [key, ln] : lines) {
      if (ln.opsPresent != sets.size()) continue;  // not common to all
      std::vector<Rat> cands{ln.zStart};
      for (const Rat& r : ln.res)
        if (r > ln.zStart) cands.push_back(r);
      std::sort(cands.begin(), cands.end());
      cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
      for (const Rat& re : cands) {
        ComplexExact z(re, key.first);
        int total = 0;
        for (const auto& e : sets) total += e.maxLogAt(z);  // all >= 0 here
        out.emplace_back(z, total + 1);
      }
    }
  }
  return IndexSet::fromGenerators(std::move(out));
}

IndexSet extendedUnion(const IndexSet& a, const IndexSet& b) {
  return extendedUnion(std::vector<IndexSet>{a, b});
}

IndexSet sumAll(const std::vector<IndexSet>& sets) {
  IndexSet acc = IndexSet::nat();
  for (const auto& e : sets) acc = acc.sum(e);
  return acc;
}

SimpleSetResult simpleSetFromRoots(const std::vector<std::pair<ComplexExact, int>>& roots) {
  if (roots.empty()) return {IndexSet::inf(), {}};
  std::vector<IndexSet> closures;
  closures.reserve(roots.size());
  for (const auto& [mu, M] : roots)
    closures.push_back(IndexSet::fromGenerators({Generator(mu, M)}));
  SimpleSetResult r;
  r.set = extendedUnion(closures);
  for (const auto& [mu, M] : roots) r.mTilde.push_back(r.set.maxLogAt(mu));
  return r;
}

}  // namespace phg
