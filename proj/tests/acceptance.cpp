// Acceptance gate: ten independent checks, one PASS/FAIL line each.
// Each check compares the library against closed forms, brute-force
// enumeration oracles, or printed golden values, with the runtime budgets
// enforced where they are part of the requirement.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "phg/bessel.hpp"
#include "phg/bmap.hpp"
#include "phg/dsl.hpp"
#include "phg/ledger.hpp"
#include "phg/rules.hpp"

using namespace phg;
using oracle::Pairs;

namespace {

int failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

void report(int k, bool pass, const std::string& note = "") {
  std::printf("CRITERION %d: %s%s%s\n", k, pass ? "PASS" : "FAIL",
              note.empty() ? "" : "  ", note.c_str());
  if (!pass) ++failures;
}

IndexSet make(std::initializer_list<std::pair<std::pair<int, int>, int>> items) {
  std::vector<Generator> g;
  for (const auto& [a, l] : items)
    g.emplace_back(ComplexExact(Rat(a.first, a.second)), l);
  return IndexSet::fromGenerators(std::move(g));
}

// ---- criterion 1: boundary matrices and pull-back tuples -------------------

bool criterion1() {
  const std::vector<std::string> src = registrySpace("Z3").faces;
  auto row = [&](const BMap& m, const std::string& G) {
    std::vector<int> r;
    for (const auto& H : src) r.push_back(m.exponent(G, H));
    return r;
  };
  const BMap& cr = registryBMap("gamma_CR");
  const BMap& lr = registryBMap("gamma_LR");
  const BMap& lc = registryBMap("gamma_LC");
  bool ok = true;
  ok = ok && row(cr, "lf") == std::vector<int>{0, 1, 0, 0, 1, 1, 0, 0};
  ok = ok && row(cr, "rf") == std::vector<int>{0, 0, 1, 0, 0, 0, 0, 1};
  ok = ok && row(cr, "ffb") == std::vector<int>{0, 0, 0, 1, 0, 0, 1, 0};
  ok = ok && cr.interiorFaces == std::set<std::string>{"H100"};
  ok = ok && row(lr, "lf") == std::vector<int>{1, 0, 0, 0, 1, 1, 0, 0};
  ok = ok && row(lr, "rf") == std::vector<int>{0, 0, 1, 0, 0, 0, 1, 0};
  ok = ok && row(lr, "ffb") == std::vector<int>{0, 0, 0, 1, 0, 0, 0, 1};
  ok = ok && lr.interiorFaces == std::set<std::string>{"H010"};
  ok = ok && row(lc, "lf") == std::vector<int>{1, 0, 0, 0, 0, 0, 0, 1};
  ok = ok && row(lc, "rf") == std::vector<int>{0, 1, 0, 0, 0, 0, 1, 0};
  ok = ok && row(lc, "ffb") == std::vector<int>{0, 0, 0, 1, 0, 1, 0, 0};
  ok = ok && row(lc, "ff0") == std::vector<int>{0, 0, 0, 0, 1, 0, 0, 0};
  ok = ok && lc.interiorFaces == std::set<std::string>{"H001"};

  // pull-back of a 0-interior family through gamma_LC
  IndexSet Elf = make({{{1, 2}, 0}}), Erf = make({{{-1, 2}, 0}});
  IndexSet Effb = make({{{0, 1}, 0}}), Eff0 = make({{{1, 1}, 0}});
  IndexFamily kp(registrySpace("X0b2"),
                 {{"lf", Elf}, {"rf", Erf}, {"ffb", Effb}, {"ff0", Eff0}});
  IndexFamily up = pullbackFamily(lc, kp);
  ok = ok && up.at("H100") == Elf && up.at("H010") == Erf &&
       up.at("H001") == IndexSet::nat() && up.at("ff_T") == Effb &&
       up.at("ff_LC0") == Eff0 && up.at("ff_LCb") == Effb &&
       up.at("ff_CRb") == Erf && up.at("ff_LRb") == Elf;

  // pull-back of a b-interior family through gamma_CR
  IndexSet Flf = make({{{1, 3}, 0}}), Frf = make({{{2, 3}, 0}});
  IndexSet Fffb = make({{{1, 1}, 0}});
  IndexFamily kq(registrySpace("Xb2"),
                 {{"lf", Flf}, {"rf", Frf}, {"ffb", Fffb}});
  IndexFamily uq = pullbackFamily(cr, kq);
  ok = ok && uq.at("H100") == IndexSet::nat() && uq.at("H010") == Flf &&
       uq.at("H001") == Frf && uq.at("ff_T") == Fffb &&
       uq.at("ff_LC0") == Flf && uq.at("ff_LCb") == Flf &&
       uq.at("ff_CRb") == Fffb && uq.at("ff_LRb") == Frf;
  return ok;
}

// ---- criterion 2: push-forward of the product family -----------------------

bool criterion2() {
  const BMap& lr = registryBMap("gamma_LR");
  IndexFamily prod(registrySpace("Z3"),
                   {{"H100", make({{{1, 2}, 0}})},
                    {"H010", make({{{1, 1}, 0}})},
                    {"H001", make({{{0, 1}, 0}})},
                    {"ff_T", make({{{1, 1}, 0}})},
                    {"ff_LC0", make({{{3, 2}, 0}, {{5, 2}, 1}})},
                    {"ff_LCb", make({{{1, 2}, 0}})},
                    {"ff_CRb", make({{{1, 2}, 0}})},
                    {"ff_LRb", make({{{3, 2}, 0}})}});
  PushforwardResult res = pushforwardFamily(lr, prod);
  bool ok = res.ok();
  ok = ok && res.family.at("lf") ==
                 make({{{1, 2}, 0}, {{3, 2}, 1}, {{5, 2}, 2}});
  ok = ok && res.family.at("rf") == make({{{0, 1}, 0}, {{1, 2}, 0}});
  ok = ok && res.family.at("ffb") == make({{{1, 1}, 0}, {{3, 2}, 0}});

  // enumeration equality against the brute-force extended union to Re <= 5
  const Rat M = 5;
  for (const auto& G : lr.target.faces) {
    std::vector<IndexSet> parts;
    for (const auto& H : lr.source.faces) {
      int e = lr.exponent(G, H);
      if (e == 1) parts.push_back(prod.at(H));
      if (e > 1) return false;  // the registry maps are unit-exponent
    }
    ok = ok && res.family.at(G).enumerateUpTo(M) ==
                   oracle::extendedUnion(parts, M);
  }
  return ok;
}

// ---- criterion 3: composition rules against the enumeration oracle ---------

struct EnumWorld {
  Rat W;  // working bound with slack above the comparison bound
  Pairs face(const OperatorClass& c, const std::string& f) const {
    return oracle::enumerate(c.at(f), W);
  }
  Pairs sum(const Pairs& a, const Pairs& b) const { return oracle::sumP(a, b, W); }
  Pairs shift(const Pairs& a, const Rat& c) const {
    return oracle::shiftP(a, c, W);
  }
  Pairs eu(std::vector<Pairs> ops) const { return oracle::euP(ops); }
};

bool faceEq(const IndexSet& sym, const Pairs& orc, const Rat& M) {
  return sym.enumerateUpTo(M) == oracle::clampP(orc, M);
}

bool leadEq(const std::vector<Generator>& lead, const Pairs& orc) {
  return lead == oracle::leadP(orc);
}

Twist randomTwist(oracle::RandomSets& rnd) {
  Twist t;
  int blocks = 1 + static_cast<int>(rnd.rng() % 2);
  for (int b = 0; b < blocks; ++b)
    t.blocks.push_back(TwistBlock{ComplexExact(rnd.smallRat()),
                                  1 + static_cast<int>(rnd.rng() % 2)});
  return t;
}

std::vector<Generator> randomLeading(oracle::RandomSets& rnd) {
  IndexSet s = rnd.indexSet(false, false);
  return s.leadingSet();
}

OperatorClass randomOperand(Kind k, int n, oracle::RandomSets& rnd,
                            const Twist& dom, const Twist& cod) {
  switch (k) {
    case Kind::TwistedZeroTrace:
    case Kind::TwistedZeroPoisson:
      return OperatorClass::makeTwisted(k, n, rnd.indexSet(), randomLeading(rnd),
                                        dom);
    case Kind::TwistedBoundary:
      return OperatorClass::makeTwistedBoundary(n, randomLeading(rnd), dom, cod);
    default: {
      std::map<std::string, IndexSet> sets;
      for (const auto& f : kindFaces(k)) sets[f] = rnd.indexSet();
      return OperatorClass::make(k, n, std::move(sets));
    }
  }
}

// minimal Re of the enumerated pointwise sum; empty means vacuous
bool sumReGreaterThan(const EnumWorld& w, const Pairs& a, const Pairs& b,
                      const Rat& c) {
  Pairs s = w.sum(a, b);
  if (s.empty()) return true;
  Rat r0 = s.front().alpha.re;
  for (const auto& g : s) r0 = std::min(r0, g.alpha.re);
  return r0 > c;
}

bool checkOneComposition(const CompositionRuleInfo& rule, int iter) {
  oracle::RandomSets rnd(static_cast<unsigned>(1000 + iter));
  const Rat M = 4;
  const EnumWorld w{M + 10};
  const int n = 1 + static_cast<int>(rnd.rng() % 3);
  const Rat nr(n);

  Twist shared = randomTwist(rnd);
  Twist other = randomTwist(rnd);
  bool matching = rnd.rng() % 10 < 7;
  const Twist& bCod = matching ? shared : other;

  // arrange the twist fields so the equality conditions hold when `matching`
  OperatorClass A = randomOperand(rule.lhs, n, rnd, shared, randomTwist(rnd));
  OperatorClass B = [&] {
    switch (rule.rhs) {
      case Kind::TwistedBoundary:
        return randomOperand(rule.rhs, n, rnd, randomTwist(rnd), bCod);
      case Kind::TwistedZeroTrace:
      case Kind::TwistedZeroPoisson:
        return randomOperand(rule.rhs, n, rnd, bCod, bCod);
      default:
        return randomOperand(rule.rhs, n, rnd, bCod, bCod);
    }
  }();

  Verdict v = composeClasses(A, B);
  if (v.status == Verdict::Status::NoRule) return false;
  if (v.ruleId != rule.id) return false;

  const Kind ka = rule.lhs, kb = rule.rhs;
  const bool aIntB = ka == Kind::ZeroBInterior;
  const bool bIntB = kb == Kind::ZeroBInterior;
  const bool aInt = aIntB || ka == Kind::ZeroInterior;
  const bool bInt = bIntB || kb == Kind::ZeroInterior;

  auto expectCond = [&](const std::string& fa, const std::string& fb) {
    bool holds = sumReGreaterThan(w, w.face(A, fa), w.face(B, fb), Rat(-1));
    return holds == v.ok();
  };

  if (ka == Kind::ZeroBInterior && kb == Kind::ZeroBInterior) {
    if (!expectCond("rf", "lf")) return false;
    if (!v.ok()) return true;
    Pairs Et = w.eu({w.face(A, "ff0"), w.shift(w.face(A, "ffb"), nr)});
    Pairs Ft = w.eu({w.face(B, "ff0"), w.shift(w.face(B, "ffb"), nr)});
    Pairs Glf = w.eu({w.face(A, "lf"),
                      w.sum(w.face(B, "lf"), w.face(A, "ffb")),
                      w.sum(w.face(B, "lf"), Et)});
    Pairs Grf = w.eu({w.face(B, "rf"),
                      w.sum(w.face(A, "rf"), w.face(B, "ffb")),
                      w.sum(w.face(A, "rf"), Ft)});
    Pairs Gffb = w.eu({w.sum(w.face(A, "ffb"), w.face(B, "ffb")),
                       w.shift(w.sum(w.face(A, "lf"), w.face(B, "rf")), 1)});
    Pairs Gff0 = w.sum(w.face(A, "ff0"), w.face(B, "ff0"));
    return faceEq(v.result->at("lf"), Glf, M) &&
           faceEq(v.result->at("rf"), Grf, M) &&
           faceEq(v.result->at("ffb"), Gffb, M) &&
           faceEq(v.result->at("ff0"), Gff0, M);
  }
  if (aInt && bInt) {
    if (!expectCond("rf", "lf")) return false;
    if (!v.ok()) return true;
    Pairs lf = aIntB ? w.eu({w.face(A, "lf"),
                             w.sum(w.face(B, "lf"), w.face(A, "ffb"))})
                     : w.face(A, "lf");
    Pairs rf = bIntB ? w.eu({w.face(B, "rf"),
                             w.sum(w.face(A, "rf"), w.face(B, "ffb"))})
                     : w.face(B, "rf");
    return faceEq(v.result->at("lf"), lf, M) &&
           faceEq(v.result->at("rf"), rf, M) &&
           faceEq(v.result->at("ff0"),
                  w.sum(w.face(A, "ff0"), w.face(B, "ff0")), M);
  }
  if (ka == Kind::ZeroPoisson && kb == Kind::Boundary) {
    return v.ok() && faceEq(v.result->at("of"), w.face(A, "of"), M) &&
           faceEq(v.result->at("ff"), w.sum(w.face(A, "ff"), w.face(B, "set")),
                  M);
  }
  if (ka == Kind::Boundary && kb == Kind::ZeroTrace) {
    return v.ok() && faceEq(v.result->at("of"), w.face(B, "of"), M) &&
           faceEq(v.result->at("ff"), w.sum(w.face(B, "ff"), w.face(A, "set")),
                  M);
  }
  if (ka == Kind::ZeroPoisson && kb == Kind::ZeroTrace) {
    return v.ok() && faceEq(v.result->at("lf"), w.face(A, "of"), M) &&
           faceEq(v.result->at("rf"), w.face(B, "of"), M) &&
           faceEq(v.result->at("ff0"), w.sum(w.face(A, "ff"), w.face(B, "ff")),
                  M);
  }
  if (ka == Kind::ZeroTrace && kb == Kind::ZeroPoisson) {
    if (!expectCond("of", "of")) return false;
    if (!v.ok()) return true;
    return faceEq(v.result->at("set"), w.sum(w.face(A, "ff"), w.face(B, "ff")),
                  M);
  }
  if (aInt && kb == Kind::ZeroPoisson) {
    if (!expectCond("rf", "of")) return false;
    if (!v.ok()) return true;
    Pairs of = aIntB ? w.eu({w.face(A, "lf"),
                             w.sum(w.face(B, "of"), w.face(A, "ffb"))})
                     : w.face(A, "lf");
    return faceEq(v.result->at("of"), of, M) &&
           faceEq(v.result->at("ff"), w.sum(w.face(B, "ff"), w.face(A, "ff0")),
                  M);
  }
  if (ka == Kind::ZeroTrace && bInt) {
    if (!expectCond("of", "lf")) return false;
    if (!v.ok()) return true;
    Pairs of = bIntB ? w.eu({w.face(B, "rf"),
                             w.sum(w.face(A, "of"), w.face(B, "ffb"))})
                     : w.face(B, "rf");
    return faceEq(v.result->at("of"), of, M) &&
           faceEq(v.result->at("ff"), w.sum(w.face(A, "ff"), w.face(B, "ff0")),
                  M);
  }

  // twisted rules: compare the full output face, the leading front face, and
  // the transported twists
  auto twistEqHolds = [&](const Twist& x, const Twist& y) {
    return (x == y) == v.ok();
  };
  if (ka == Kind::TwistedZeroPoisson && kb == Kind::TwistedBoundary) {
    if (!twistEqHolds(*A.twistDom(), *B.twistCod())) return false;
    if (!v.ok()) return true;
    return faceEq(v.result->at("of"), w.face(A, "of"), M) &&
           leadEq(v.result->at("ff").generators(),
                  w.sum(w.face(A, "ff"), w.face(B, "set"))) &&
           *v.result->twistDom() == *B.twistDom();
  }
  if (ka == Kind::TwistedBoundary && kb == Kind::TwistedZeroTrace) {
    if (!twistEqHolds(*A.twistDom(), *B.twistDom())) return false;
    if (!v.ok()) return true;
    return faceEq(v.result->at("of"), w.face(B, "of"), M) &&
           leadEq(v.result->at("ff").generators(),
                  w.sum(w.face(B, "ff"), w.face(A, "set"))) &&
           *v.result->twistDom() == *A.twistCod();
  }
  if (ka == Kind::TwistedZeroPoisson && kb == Kind::TwistedZeroTrace) {
    if (!twistEqHolds(*A.twistDom(), *B.twistDom())) return false;
    if (!v.ok()) return true;
    return faceEq(v.result->at("lf"), w.face(A, "of"), M) &&
           faceEq(v.result->at("rf"), w.face(B, "of"), M) &&
           leadEq(v.result->leading("ff0"),
                  w.sum(w.face(A, "ff"), w.face(B, "ff")));
  }
  if (ka == Kind::TwistedZeroTrace && kb == Kind::TwistedZeroPoisson) {
    if (!expectCond("of", "of")) return false;
    if (!v.ok()) return true;
    return leadEq(v.result->at("set").generators(),
                  w.sum(w.face(A, "ff"), w.face(B, "ff"))) &&
           *v.result->twistDom() == *B.twistDom() &&
           *v.result->twistCod() == *A.twistDom();
  }
  if (ka == Kind::TwistedBoundary && kb == Kind::TwistedBoundary) {
    if (!twistEqHolds(*A.twistDom(), *B.twistCod())) return false;
    if (!v.ok()) return true;
    return leadEq(v.result->at("set").generators(),
                  w.sum(w.face(A, "set"), w.face(B, "set"))) &&
           *v.result->twistDom() == *B.twistDom() &&
           *v.result->twistCod() == *A.twistCod();
  }
  if (aInt && kb == Kind::TwistedZeroPoisson) {
    if (!expectCond("rf", "of")) return false;
    if (!v.ok()) return true;
    Pairs of = aIntB ? w.eu({w.face(A, "lf"),
                             w.sum(w.face(B, "of"), w.face(A, "ffb"))})
                     : w.face(A, "lf");
    return faceEq(v.result->at("of"), of, M) &&
           leadEq(v.result->at("ff").generators(),
                  w.sum(w.face(B, "ff"), w.face(A, "ff0"))) &&
           *v.result->twistDom() == *B.twistDom();
  }
  if (ka == Kind::TwistedZeroTrace && bInt) {
    if (!expectCond("of", "lf")) return false;
    if (!v.ok()) return true;
    Pairs of = bIntB ? w.eu({w.face(B, "rf"),
                             w.sum(w.face(A, "of"), w.face(B, "ffb"))})
                     : w.face(B, "rf");
    return faceEq(v.result->at("of"), of, M) &&
           leadEq(v.result->at("ff").generators(),
                  w.sum(w.face(A, "ff"), w.face(B, "ff0"))) &&
           *v.result->twistDom() == *A.twistDom();
  }
  return false;  // a table pair without an oracle branch is itself a failure
}

bool criterion3() {
  std::vector<CompositionRuleInfo> rules = compositionRules();
  for (int iter = 0; iter < 200; ++iter) {
    const auto& rule = rules[iter % rules.size()];
    if (!checkOneComposition(rule, iter)) return false;
  }
  return true;
}

// ---- criterion 4: adjoint involution ---------------------------------------

bool criterion4() {
  static const Kind kinds[] = {
      Kind::VeryResidual, Kind::ResidualTrace, Kind::ResidualPoisson,
      Kind::BCalc,        Kind::ZeroCalc,      Kind::ExtZeroCalc,
      Kind::ZeroInterior, Kind::ZeroBInterior, Kind::ZeroTrace,
      Kind::ZeroPoisson,  Kind::Boundary};
  const Rat delta(-1, 2);
  oracle::RandomSets rnd(4242);
  for (int iter = 0; iter < 100; ++iter) {
    Kind k = kinds[iter % (sizeof(kinds) / sizeof(kinds[0]))];
    int n = 1 + static_cast<int>(rnd.rng() % 3);
    std::map<std::string, IndexSet> sets;
    for (const auto& f : kindFaces(k)) sets[f] = rnd.indexSet(true);
    std::optional<int> order;
    if (k == Kind::ZeroCalc && rnd.rng() % 2)
      order = static_cast<int>(rnd.rng() % 7) - 3;
    OperatorClass c = OperatorClass::make(k, n, std::move(sets), order);
    if (!(adjointClass(adjointClass(c, delta), delta) == c)) return false;
  }
  return true;
}

// ---- criterion 5: parametrix ledger conditions -----------------------------

bool criterion5() {
  LedgerInput in;
  in.specb = {{ComplexExact(Rat(1, 2)), 0}, {ComplexExact(Rat(-1, 2)), 0}};
  in.delta = 0;
  in.deltaBar = Rat(1, 2);
  in.m = 2;
  in.n = 2;
  Twist dom{{TwistBlock{ComplexExact(Rat(-1, 2)), 1}}};
  Twist cod{{TwistBlock{ComplexExact(Rat(0)), 1}}};
  OperatorClass Q = OperatorClass::makeTwistedBoundary(
      2, {Generator(ComplexExact(Rat(0)), 0)}, dom, cod);
  Ledger led = parametrixLedger(in, Q);
  if (!led.ok()) return false;
  const LedgerStep& g1 = led.step("G1");
  if (g1.conditions !=
      std::vector<std::string>{"OK Re(H_lf)=1/2 > 0", "OK Re(H_rf)=-1/2 > -1",
                               "OK lead(H_ff0)={(0,0)}"})
    return false;
  // the recorded conditions must hold for the remainder classes themselves
  const OperatorClass& r = *led.step("R_left").cls;
  return r.at("lf").reGreaterThan(in.delta) &&
         r.at("rf").reGreaterThan(-in.delta - 1) &&
         led.step("G1").cls->at("ff0").leadingSet() ==
             std::vector<Generator>{Generator(ComplexExact(Rat(0)), 0)};
}

// ---- criteria 6-9: the numeric model ---------------------------------------

BesselSpec kSpec() {
  BesselSpec spec;
  spec.m = 2;
  spec.coeffs[{2, {0}}] = 1.0;
  spec.coeffs[{0, {0}}] = -0.25;
  spec.coeffs[{0, {2}}] = 1.0;
  spec.eta = {1.0};
  return spec;
}

bool criterion6() {
  BesselSpec spec = kSpec();
  ModelContext ctx = ModelContext::make(1, -1.0);
  KernelResult k = solveBesselKernel(spec, ctx);
  if (k.dim() != 1) return false;

  HalfLineFn ref = ctx.sample([](double x) {
    return Cx(std::sqrt(M_PI / (2.0 * x)) * std::exp(-x));
  });
  Cx scale = 0.0;
  double rn = 0.0;
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    double x = ctx.x(i);
    if (x < 1e-3 || x > 50.0) continue;
    scale += std::conj(k.basis[0].v[i]) * ref.v[i];
    rn += std::norm(k.basis[0].v[i]);
  }
  scale /= rn;
  double dn = 0.0;
  rn = 0.0;
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    double x = ctx.x(i);
    if (x < 1e-3 || x > 50.0) continue;
    dn += std::norm(scale * k.basis[0].v[i] - ref.v[i]);
    rn += std::norm(ref.v[i]);
  }
  if (!(std::sqrt(dn / rn) < 1e-5)) return false;

  ModelContext ctx0 = ModelContext::make(1, 0.0);
  return solveBesselKernel(spec, ctx0).dim() == 0;
}

bool criterion7() {
  ModelContext ctx = ModelContext::make(1, -1.0);
  HalfLineFn u = ctx.sample([](double x) {
    return Cx((2.0 + 3.0 * std::log(x)) * std::sqrt(x) * std::exp(-2.0 * x));
  });
  Vec c = traceCoefficients(ctx, u, Cx(0.5), 1);
  double worst = 0.0;
  for (double t : {0.5, 2.0, 5.0}) {
    HalfLineFn ut = dilate(ctx, u, t);
    Vec ct = traceCoefficients(ctx, ut, Cx(0.5), 1);
    Vec want = twistPow(t, Cx(0.5), 1) * c;
    worst = std::max(worst, (ct - want).cwiseAbs().maxCoeff());
  }
  return worst < 1e-8;
}

bool criterion8() {
  BesselSpec spec = kSpec();
  ModelContext ctx = ModelContext::make(1, -1.0, 1e-8, 1e3, 10001);
  for (double t : {0.5, 2.0})
    if (!(verifyHomogeneity(HomFamily::Trace, spec, ctx, t, 0.5) < 1e-6))
      return false;
  return true;
}

bool criterion9() {
  // twistPow group law
  std::vector<std::pair<Cx, int>> blocks = {{Cx(-0.5), 0}, {Cx(0.5, 0.25), 1},
                                            {Cx(1.0), 2}};
  for (double s : {0.5, 2.0, 3.0})
    for (double t : {0.4, 1.0, 2.5}) {
      Mat lhs = twistPow(s, blocks) * twistPow(t, blocks);
      Mat rhs = twistPow(s * t, blocks);
      if ((lhs - rhs).cwiseAbs().maxCoeff() >= 1e-12) return false;
    }

  // the inverse identity on a 20-function battery
  BesselSpec spec = kSpec();
  ModelContext ctx = ModelContext::make(1, -1.0);
  TraceFamily fam = besselTraceFamily(spec, ctx, 0.5);
  Mat cal = calderonSpace(fam);
  Mat khat = cal * cal.adjoint();
  Mat sigmaQ = Mat::Identity(fam.dimEL(), fam.dimEL());
  for (int i = 0; i < 20; ++i) {
    double p = 0.6 + 0.09 * i;
    double q = 0.7 + 0.05 * (i % 7);
    HalfLineFn u0 = ctx.sample(
        [&](double x) { return Cx(std::pow(x, p) * std::exp(-q * x)); });
    HalfLineFn v = applyBessel(spec, ctx, u0);
    for (auto& z : v.v)
      if (std::isnan(z.real())) z = 0;
    Vec phi = sigmaQ * fam.trace(u0);
    BVPResult r = modelBVPSolve(fam, sigmaQ, khat, v, phi);
    HalfLineFn d = u0;
    for (std::size_t j = 0; j < d.v.size(); ++j) d.v[j] -= r.u.v[j];
    if (!(ctx.norm(d) / ctx.norm(u0) < 1e-5)) return false;
  }
  return true;
}

// ---- criterion 10: DSL round-trip and fuzz ---------------------------------

bool criterion10() {
  namespace fs = std::filesystem;
  std::vector<fs::path> corpus;
  for (const auto& e : fs::directory_iterator(PHG_SCRIPTS_DIR))
    if (e.path().extension() == ".phg") corpus.push_back(e.path());
  std::sort(corpus.begin(), corpus.end());
  if (corpus.empty()) return false;
  for (const auto& p : corpus) {
    std::ifstream in(p);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string once, twice;
    try {
      once = formatScript(parseScript(buf.str()));
      twice = formatScript(parseScript(once));
    } catch (const DslError&) {
      return false;
    }
    if (once != twice) return false;
  }

  std::mt19937 rng(31337);
  const std::string alphabet =
      "{}()[],+-=:/ \t\n0123456789iEUletprintcomposeshiftconjtrunclead"
      "#INFtraceboundaryopkerneldeltaledger";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> len(0, 4096);
  for (int it = 0; it < 10000; ++it) {
    std::string s;
    int n = len(rng) % (it % 3 == 0 ? 4096 : 200);
    for (int k = 0; k < n; ++k) s += alphabet[pick(rng)];
    try {
      parseScript(s);
    } catch (const DslError&) {
      // spanned diagnostics are the expected failure mode
    }
  }
  return true;
}

}  // namespace

int main() {
  {
    Timer t;
    bool ok = criterion1();
    double s = t.seconds();
    report(1, ok && s < 1.0, ok && s >= 1.0 ? "over time budget" : "");
  }
  {
    Timer t;
    bool ok = criterion2();
    double s = t.seconds();
    report(2, ok && s < 5.0, ok && s >= 5.0 ? "over time budget" : "");
  }
  report(3, criterion3());
  report(4, criterion4());
  report(5, criterion5());
  {
    Timer t;
    bool ok = criterion6();
    double s = t.seconds();
    report(6, ok && s < 10.0, ok && s >= 10.0 ? "over time budget" : "");
  }
  report(7, criterion7());
  report(8, criterion8());
  report(9, criterion9());
  report(10, criterion10());
  return failures == 0 ? 0 : 1;
}
