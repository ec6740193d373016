#include "phg/ledger.hpp"

#include <algorithm>

namespace phg {

namespace {

// Records Re(s) > c on the step; flips step.ok on failure.
void stepCondGT(LedgerStep& st, const std::string& label, const IndexSet& s,
                const Rat& c) {
  bool ok = s.reGreaterThan(c);
  std::string val = s.isInf() ? "INF" : ratToString(s.infRe());
  st.conditions.push_back((ok ? "OK Re(" : "FAIL Re(") + label + ")=" + val +
                          (ok ? " > " : " <= ") + ratToString(c));
  st.ok = st.ok && ok;
}

void stepLeadNat(LedgerStep& st, const std::string& label, const IndexSet& s) {
  bool ok = !s.isInf() &&
            s.leadingSet() == std::vector<Generator>{Generator(ComplexExact(Rat(0)), 0)};
  st.conditions.push_back(std::string(ok ? "OK" : "FAIL") + " lead(" + label +
                          ")={(0,0)}" + (ok ? "" : " violated"));
  st.ok = st.ok && ok;
}

Twist negated(const Twist& t) {
  Twist out = t;
  for (auto& b : out.blocks) b.mu = -b.mu;
  return out;
}

}  // namespace

std::string LedgerStep::str() const {
  std::string s = name;
  if (cls) s += ": " + cls->str();
  if (!ruleId.empty()) s += " [" + ruleId + "]";
  for (const auto& c : conditions) s += "\n    " + c;
  for (const auto& nte : notes) s += "\n    note: " + nte;
  return s;
}

bool Ledger::ok() const {
  return std::all_of(steps.begin(), steps.end(),
                     [](const LedgerStep& s) { return s.ok; });
}

const LedgerStep& Ledger::step(const std::string& name) const {
  for (const auto& s : steps)
    if (s.name == name) return s;
  throw Error("ledger has no step '" + name + "'");
}

std::string Ledger::str() const {
  std::string s = "E_lf=" + Elf.str() + " E_rf=" + Erf.str() + " s_L=" + sL.str();
  for (const auto& st : steps) s += "\n  " + st.str();
  return s;
}

Ledger parametrixLedger(const LedgerInput& in, const OperatorClass& Q) {
  if (!(in.delta < in.deltaBar))
    throw Error("parametrix ledger needs delta < deltaBar (no critical strip)");
  if (Q.kind() != Kind::TwistedBoundary)
    throw Error("the boundary operator must be a TwistedBoundary class");
  if (in.m <= 0) throw Error("interior order m must be positive");

  Ledger led;
  const int n = in.n;
  const Generator zero(ComplexExact(Rat(0)), 0);

  // Roots strictly right of the weight line generate the output-face set.
  std::vector<std::pair<ComplexExact, int>> rightRoots;
  for (const auto& [mu, mult] : in.specb)
    if (mu.re > in.delta) rightRoots.emplace_back(mu, mult);
  SimpleSetResult simple = simpleSetFromRoots(rightRoots);
  led.Elf = simple.set;
  led.Erf = led.Elf.conjugate().shift(-2 * in.delta - 1);

  {
    LedgerStep st;
    st.name = "E_lf";
    st.ruleId = "thm:mazzeo-parametrix";
    st.notes.push_back("E_lf=" + led.Elf.str() + " from roots with Re > " +
                       ratToString(in.delta));
    st.notes.push_back("E_rf=" + led.Erf.str() + " = conj(E_lf)-2*delta-1");
    led.steps.push_back(std::move(st));
  }

  // Critical roots lie in the strip (delta, deltaBar]; their block sizes come
  // from the log orders they attain inside E_lf.
  for (size_t i = 0; i < rightRoots.size(); ++i) {
    const auto& [mu, mult] = rightRoots[i];
    (void)mult;
    if (mu.re <= in.deltaBar)
      led.sL.blocks.push_back(TwistBlock{mu, simple.mTilde[i] + 1});
  }
  std::sort(led.sL.blocks.begin(), led.sL.blocks.end(),
            [](const TwistBlock& a, const TwistBlock& b) { return a.mu < b.mu; });
  if (led.sL.blocks.empty())
    throw Error("no indicial roots in the critical strip (" +
                ratToString(in.delta) + ", " + ratToString(in.deltaBar) + "]");
  {
    LedgerStep st;
    st.name = "s_L";
    st.notes.push_back("critical twist s_L=" + led.sL.str());
    led.steps.push_back(std::move(st));
  }

  const Twist negSL = negated(led.sL);
  if (!(*Q.twistDom() == negSL))
    throw Error("boundary operator twist domain " + Q.twistDom()->str() +
                " does not match the critical twist (expected " + negSL.str() +
                ")");
  const Twist tw = *Q.twistCod();

  auto pushClass = [&](std::string name, std::string ruleId, OperatorClass cls,
                       std::string note = "") {
    LedgerStep st;
    st.name = std::move(name);
    st.ruleId = std::move(ruleId);
    st.cls = std::move(cls);
    if (!note.empty()) st.notes.push_back(std::move(note));
    led.steps.push_back(std::move(st));
    return &led.steps.back();
  };
  auto pushCompose = [&](std::string name, const OperatorClass& a,
                         const OperatorClass& b) -> OperatorClass {
    Verdict v = composeClasses(a, b);
    LedgerStep st;
    st.name = std::move(name);
    st.ruleId = v.ruleId;
    st.conditions = v.conditions;
    st.ok = v.ok();
    if (!v.ok())
      throw Error("ledger step " + st.name + " failed: " +
                  (v.conditions.empty() ? "no rule" : v.conditions.front()));
    st.cls = v.result;
    led.steps.push_back(std::move(st));
    return *led.steps.back().cls;
  };

  OperatorClass AL = OperatorClass::makeTwisted(Kind::TwistedZeroTrace, n,
                                                led.Erf, {zero}, negSL);
  pushClass("A_L", "thm:A-L-class", AL, "critical trace data map");
  OperatorClass B0 = OperatorClass::makeTwisted(Kind::TwistedZeroPoisson, n,
                                                led.Elf, {zero}, negSL);
  pushClass("B0", "constr:bessel-poisson-map", B0, "Bessel Poisson map");
  OperatorClass K0 = OperatorClass::makeTwistedBoundary(n, {zero}, tw, negSL);
  pushClass("K0", "constr:bessel-poisson-map", K0,
            "approximate inverse of the boundary symbol");

  OperatorClass C0 = pushCompose("C0", B0, K0);
  OperatorClass QA = pushCompose("QA", Q, AL);
  {
    // The interior correction: Poisson after trace, plus the pairing
    // inequality the remainder estimate rests on.
    Verdict v = composeClasses(C0, QA);
    LedgerStep st;
    st.name = "C0QA";
    st.ruleId = v.ruleId;
    st.conditions = v.conditions;
    st.ok = v.ok();
    st.cls = v.result;
    stepCondGT(st, "E_lf+E_rf", led.Elf.sum(led.Erf), Rat(-1));
    bool bad = !st.ok;
    led.steps.push_back(std::move(st));
    if (bad) return led;
  }

  OperatorClass P1 = OperatorClass::make(
      Kind::ZeroCalc, n,
      {{"lf", led.Elf}, {"rf", led.Erf}, {"ff0", IndexSet::nat()}});
  pushClass("P1", "thm:main-theorem", P1, "interior parametrix ansatz");
  OperatorClass T0 = OperatorClass::make(
      Kind::ZeroCalc, n,
      {{"lf", led.Elf},
       {"rf", led.Erf},
       {"ff0", IndexSet::nat().removeLeading(ComplexExact(Rat(0)))}});
  pushClass("T0", "thm:main-theorem", T0,
            "front-face error after removing the leading normal operator");

  OperatorClass G1 = OperatorClass::make(
      Kind::ZeroCalc, n,
      {{"lf", led.Elf}, {"rf", led.Erf}, {"ff0", IndexSet::nat()}}, -in.m);
  {
    LedgerStep st;
    st.name = "G1";
    st.ruleId = "thm:main-theorem";
    st.cls = G1;
    stepCondGT(st, "H_lf", led.Elf, in.delta);
    stepCondGT(st, "H_rf", led.Erf, -in.delta - 1);
    stepLeadNat(st, "H_ff0", IndexSet::nat());
    bool bad = !st.ok;
    led.steps.push_back(std::move(st));
    if (bad) return led;
  }
  pushClass("C1", "thm:main-theorem", C0, "boundary correction, same class as C0");
  OperatorClass R = OperatorClass::make(Kind::VeryResidual, n,
                                        {{"lf", led.Elf}, {"rf", led.Erf}});
  pushClass("R_left", "thm:main-theorem", R, "left remainder");

  pushClass("G2", "thm:main-theorem", G1, "same class as G1");
  pushClass("C2", "thm:main-theorem", C0, "same class as C0");
  OperatorClass P2 = adjointClass(P1, in.delta);
  pushClass("P2", "thm:main-theorem", P2, "adjoint interior ansatz");
  OperatorClass Rr = OperatorClass::make(
      Kind::VeryResidual, n, {{"lf", P2.at("lf")}, {"rf", P2.at("rf")}});
  pushClass("R_right", "thm:main-theorem", Rr, "right remainder");

  return led;
}

}  // namespace phg
