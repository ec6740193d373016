#include "phg/rules.hpp"

#include <algorithm>

namespace phg {

namespace {

using Status = Verdict::Status;

std::string reValStr(const IndexSet& s) {
  return s.isInf() ? "INF" : ratToString(s.infRe());
}

// Records and checks Re(s) > c. INF passes vacuously.
bool condGT(Verdict& v, const std::string& label, const IndexSet& s, const Rat& c) {
  bool ok = s.reGreaterThan(c);
  v.conditions.push_back((ok ? "OK Re(" : "FAIL Re(") + label + ")=" + reValStr(s) +
                         (ok ? " > " : " <= ") + ratToString(c));
  return ok;
}

// Records and checks Re(s) >= c. INF passes vacuously.
bool condGE(Verdict& v, const std::string& label, const IndexSet& s, const Rat& c) {
  bool ok = s.reGreaterEqual(c);
  v.conditions.push_back((ok ? "OK Re(" : "FAIL Re(") + label + ")=" + reValStr(s) +
                         (ok ? " >= " : " < ") + ratToString(c));
  return ok;
}

std::string leadStr(const std::vector<Generator>& lead) {
  std::string s = "{";
  for (size_t i = 0; i < lead.size(); ++i) {
    if (i) s += ",";
    s += lead[i].str();
  }
  return s + "}";
}

// Records and checks that the leading set of a face is exactly {(0,0)}.
bool condLeadZero(Verdict& v, const std::string& label, const OperatorClass& c,
                  const std::string& face) {
  std::vector<Generator> lead = c.leading(face);
  bool ok = lead.size() == 1 && lead[0] == Generator(ComplexExact(Rat(0)), 0);
  if (ok)
    v.conditions.push_back("OK lead(" + label + ")={(0,0)}");
  else
    v.conditions.push_back("FAIL lead(" + label + ")=" + leadStr(lead) +
                           " != {(0,0)}");
  return ok;
}

bool condTwistEq(Verdict& v, const std::string& label, const Twist& a, const Twist& b) {
  bool ok = a == b;
  v.conditions.push_back((ok ? "OK " : "FAIL ") + label + ": " + a.str() +
                         (ok ? " == " : " != ") + b.str());
  return ok;
}

Verdict okWith(Verdict v, OperatorClass result) {
  v.status = Status::Ok;
  v.result = std::move(result);
  return v;
}

Verdict failed(Verdict v) {
  v.status = Status::Fails;
  v.result.reset();
  return v;
}

// Leading set of the sum of two index sets; empty when the sum is INF.
std::vector<Generator> leadOfSum(const IndexSet& a, const IndexSet& b) {
  IndexSet s = a.sum(b);
  if (s.isInf()) return {};
  return s.leadingSet();
}

}  // namespace

Verdict Verdict::noRule(std::string why) {
  Verdict v;
  v.status = Status::NoRule;
  v.notes.push_back(std::move(why));
  return v;
}

Verdict Verdict::fails(std::string ruleId, std::string condition) {
  Verdict v;
  v.status = Status::Fails;
  v.ruleId = std::move(ruleId);
  v.conditions.push_back(std::move(condition));
  return v;
}

std::string Verdict::str() const {
  std::string s = status == Status::Ok      ? "OK"
                  : status == Status::Fails ? "FAIL"
                                            : "NORULE";
  if (!ruleId.empty()) s += " [" + ruleId + "]";
  if (result) s += " " + result->str();
  for (const auto& c : conditions) s += "\n  " + c;
  for (const auto& nte : notes) s += "\n  note: " + nte;
  return s;
}

// ---------------------------------------------------------------------------
// Inclusions
// ---------------------------------------------------------------------------

Verdict includeInto(const OperatorClass& c, Kind target) {
  const int n = c.n();
  const Rat nr(n);
  Verdict v;
  const Kind k = c.kind();
  if (k == target) {
    v.ruleId = "identity";
    return okWith(std::move(v), c);
  }

  if (k == Kind::VeryResidual && target == Kind::ZeroCalc) {
    v.ruleId = "lem:calculus-inclusions";
    return okWith(std::move(v),
                  OperatorClass::make(Kind::ZeroCalc, n,
                                      {{"lf", c.at("lf")},
                                       {"rf", c.at("rf")},
                                       {"ff0", c.at("lf").sum(c.at("rf")).shift(nr + 1)}}));
  }
  if (k == Kind::VeryResidual && target == Kind::BCalc) {
    v.ruleId = "lem:calculus-inclusions";
    return okWith(std::move(v),
                  OperatorClass::make(Kind::BCalc, n,
                                      {{"lf", c.at("lf")},
                                       {"rf", c.at("rf")},
                                       {"ffb", c.at("lf").sum(c.at("rf")).shift(Rat(1))}}));
  }
  if (k == Kind::ZeroCalc && target == Kind::ExtZeroCalc) {
    v.ruleId = "lem:calculus-inclusions";
    return okWith(std::move(v),
                  OperatorClass::make(Kind::ExtZeroCalc, n,
                                      {{"lf", c.at("lf")},
                                       {"rf", c.at("rf")},
                                       {"ffb", c.at("lf").sum(c.at("rf")).shift(Rat(1))},
                                       {"ff0", c.at("ff0")}}));
  }
  if (k == Kind::BCalc && target == Kind::ExtZeroCalc) {
    v.ruleId = "lem:calculus-inclusions";
    return okWith(std::move(v),
                  OperatorClass::make(Kind::ExtZeroCalc, n,
                                      {{"lf", c.at("lf")},
                                       {"rf", c.at("rf")},
                                       {"ffb", c.at("ffb")},
                                       {"ff0", c.at("ffb").shift(nr)}}));
  }
  if (k == Kind::ResidualTrace && target == Kind::ZeroTrace) {
    v.ruleId = "lem:calculus-inclusions";
    return okWith(std::move(v),
                  OperatorClass::make(Kind::ZeroTrace, n,
                                      {{"of", c.at("of")},
                                       {"ff", c.at("of").shift(nr + 1)}}));
  }
  if (k == Kind::ResidualPoisson && target == Kind::ZeroPoisson) {
    v.ruleId = "lem:calculus-inclusions";
    return okWith(std::move(v),
                  OperatorClass::make(Kind::ZeroPoisson, n,
                                      {{"of", c.at("of")},
                                       {"ff", c.at("of").shift(nr)}}));
  }
  if (k == Kind::ZeroInterior && target == Kind::ZeroCalc) {
    v.ruleId = "cor:local-0-interior-is-in-0-calculus";
    IndexSet ff0 = extendedUnion(c.at("ff0"),
                                 c.at("lf").sum(c.at("rf")).shift(nr + 1));
    return okWith(std::move(v),
                  OperatorClass::make(Kind::ZeroCalc, n,
                                      {{"lf", c.at("lf")},
                                       {"rf", c.at("rf")},
                                       {"ff0", std::move(ff0)}}));
  }
  if (k == Kind::ZeroInterior && target == Kind::ZeroBInterior) {
    v.ruleId = "lem:calculus-inclusions";
    return okWith(std::move(v),
                  OperatorClass::make(Kind::ZeroBInterior, n,
                                      {{"lf", c.at("lf")},
                                       {"rf", c.at("rf")},
                                       {"ffb", c.at("lf").sum(c.at("rf")).shift(Rat(1))},
                                       {"ff0", c.at("ff0")}}));
  }
  if (k == Kind::ZeroBInterior && target == Kind::ExtZeroCalc) {
    v.ruleId = "cor:0b-interior-extended-0-calculus";
    IndexSet ff0 = extendedUnion(c.at("ff0"), c.at("ffb").shift(nr));
    return okWith(std::move(v),
                  OperatorClass::make(Kind::ExtZeroCalc, n,
                                      {{"lf", c.at("lf")},
                                       {"rf", c.at("rf")},
                                       {"ffb", c.at("ffb")},
                                       {"ff0", std::move(ff0)}}));
  }
  if ((k == Kind::TwistedZeroTrace && target == Kind::ZeroTrace) ||
      (k == Kind::TwistedZeroPoisson && target == Kind::ZeroPoisson)) {
    v.ruleId = "cor:twisted-0-trace-0-poisson-are-untwisted";
    // Expanding the twist multiplies by x^{mu} log^l x (trace side) or its
    // inverse (Poisson side), block by block.
    const bool trace = (k == Kind::TwistedZeroTrace);
    std::vector<Generator> gens;
    for (const auto& g : c.at("ff").generators())
      for (const auto& blk : c.twistDom()->blocks)
        for (int l = 0; l < blk.size; ++l)
          gens.emplace_back(trace ? g.alpha + blk.mu : g.alpha - blk.mu, g.l + l);
    return okWith(std::move(v),
                  OperatorClass::make(target, n,
                                      {{"of", c.at("of")},
                                       {"ff", IndexSet::fromGenerators(std::move(gens))}}));
  }
  if (k == Kind::ZeroCalc && target == Kind::ZeroInterior)
    return Verdict::noRule(
        "a 0-calculus operator is not in general 0-interior; no inclusion edge");
  return Verdict::noRule("no inclusion edge " + kindName(k) + " -> " +
                         kindName(target));
}

// ---------------------------------------------------------------------------
// Fourier rules
// ---------------------------------------------------------------------------

Verdict fourierRule(FourierDirection dir, const OperatorClass& c) {
  const int n = c.n();
  const Rat nr(n);
  Verdict v;
  switch (c.kind()) {
    case Kind::ZeroPoisson: {
      v.ruleId = "prop:hintz";
      IndexSet of = c.at("of"), ff = c.at("ff");
      if (dir == FourierDirection::ToSymbolic)
        of = extendedUnion(of, ff);
      else
        ff = extendedUnion(ff, c.at("of").shift(nr));
      return okWith(std::move(v),
                    OperatorClass::make(Kind::ZeroPoisson, n,
                                        {{"of", std::move(of)}, {"ff", std::move(ff)}}));
    }
    case Kind::ZeroTrace: {
      v.ruleId = "cor:symbolic-0-trace";
      IndexSet of = c.at("of"), ff = c.at("ff");
      if (dir == FourierDirection::ToSymbolic)
        of = extendedUnion(of, ff.shift(Rat(-1)));
      else
        ff = extendedUnion(ff, c.at("of").shift(nr + 1));
      return okWith(std::move(v),
                    OperatorClass::make(Kind::ZeroTrace, n,
                                        {{"of", std::move(of)}, {"ff", std::move(ff)}}));
    }
    case Kind::ZeroBInterior: {
      v.ruleId = "prop:symb-to-phys-0b";
      IndexSet ffb = c.at("ffb"), ff0 = c.at("ff0");
      if (dir == FourierDirection::ToSymbolic)
        ffb = extendedUnion(ffb, ff0);
      else
        ff0 = extendedUnion(ff0, c.at("ffb").shift(nr));
      return okWith(std::move(v),
                    OperatorClass::make(Kind::ZeroBInterior, n,
                                        {{"lf", c.at("lf")},
                                         {"rf", c.at("rf")},
                                         {"ffb", std::move(ffb)},
                                         {"ff0", std::move(ff0)}}));
    }
    case Kind::ZeroInterior: {
      if (dir == FourierDirection::ToSymbolic)
        return Verdict::noRule(
            "no symbolic-side rule for ZeroInterior; only the physical direction is stated");
      v.ruleId = "prop:improved-hintz";
      IndexSet ff0 = extendedUnion(c.at("ff0"),
                                   c.at("lf").sum(c.at("rf")).shift(nr + 1));
      return okWith(std::move(v),
                    OperatorClass::make(Kind::ZeroCalc, n,
                                        {{"lf", c.at("lf")},
                                         {"rf", c.at("rf")},
                                         {"ff0", std::move(ff0)}}));
    }
    default:
      return Verdict::noRule("no Fourier rule for " + kindName(c.kind()));
  }
}

// ---------------------------------------------------------------------------
// Adjoints
// ---------------------------------------------------------------------------

OperatorClass adjointClass(const OperatorClass& c, const Rat& delta) {
  const int n = c.n();
  const Rat up = 2 * delta + 1;   // shift toward the left/output side
  const Rat dn = -2 * delta - 1;  // shift toward the right/input side
  auto cj = [](const IndexSet& s) { return s.conjugate(); };
  switch (c.kind()) {
    case Kind::ZeroTrace:
      return OperatorClass::make(Kind::ZeroPoisson, n,
                                 {{"of", cj(c.at("of")).shift(up)},
                                  {"ff", cj(c.at("ff")).shift(2 * delta)}});
    case Kind::ZeroPoisson:
      return OperatorClass::make(Kind::ZeroTrace, n,
                                 {{"of", cj(c.at("of")).shift(dn)},
                                  {"ff", cj(c.at("ff")).shift(-2 * delta)}});
    case Kind::ResidualTrace:
      return OperatorClass::make(Kind::ResidualPoisson, n,
                                 {{"of", cj(c.at("of")).shift(up)}});
    case Kind::ResidualPoisson:
      return OperatorClass::make(Kind::ResidualTrace, n,
                                 {{"of", cj(c.at("of")).shift(dn)}});
    case Kind::VeryResidual:
      return OperatorClass::make(Kind::VeryResidual, n,
                                 {{"lf", cj(c.at("rf")).shift(up)},
                                  {"rf", cj(c.at("lf")).shift(dn)}});
    case Kind::BCalc:
      return OperatorClass::make(Kind::BCalc, n,
                                 {{"lf", cj(c.at("rf")).shift(up)},
                                  {"rf", cj(c.at("lf")).shift(dn)},
                                  {"ffb", cj(c.at("ffb"))}});
    case Kind::ZeroCalc:
      return OperatorClass::make(Kind::ZeroCalc, n,
                                 {{"lf", cj(c.at("rf")).shift(up)},
                                  {"rf", cj(c.at("lf")).shift(dn)},
                                  {"ff0", cj(c.at("ff0"))}},
                                 c.interiorOrder());
    case Kind::ZeroInterior:
      return OperatorClass::make(Kind::ZeroInterior, n,
                                 {{"lf", cj(c.at("rf")).shift(up)},
                                  {"rf", cj(c.at("lf")).shift(dn)},
                                  {"ff0", cj(c.at("ff0"))}});
    case Kind::ExtZeroCalc:
    case Kind::ZeroBInterior:
      return OperatorClass::make(c.kind(), n,
                                 {{"lf", cj(c.at("rf")).shift(up)},
                                  {"rf", cj(c.at("lf")).shift(dn)},
                                  {"ffb", cj(c.at("ffb"))},
                                  {"ff0", cj(c.at("ff0"))}});
    case Kind::Boundary:
      return OperatorClass::make(Kind::Boundary, n, {{"set", cj(c.at("set"))}});
    case Kind::TwistedZeroTrace:
    case Kind::TwistedZeroPoisson: {
      const bool trace = (c.kind() == Kind::TwistedZeroTrace);
      const Rat ofShift = trace ? up : dn;
      const Rat ffShift = trace ? 2 * delta : -2 * delta;
      std::vector<Generator> lead;
      for (const auto& g : c.at("ff").generators())
        lead.emplace_back(g.alpha.conj() + ComplexExact(ffShift), g.l);
      return OperatorClass::makeTwisted(
          trace ? Kind::TwistedZeroPoisson : Kind::TwistedZeroTrace, n,
          cj(c.at("of")).shift(ofShift), std::move(lead),
          c.twistDom()->negAdjoint());
    }
    case Kind::TwistedBoundary: {
      std::vector<Generator> lead;
      for (const auto& g : c.at("set").generators())
        lead.emplace_back(g.alpha.conj(), g.l);
      return OperatorClass::makeTwistedBoundary(n, std::move(lead),
                                                c.twistCod()->negAdjoint(),
                                                c.twistDom()->negAdjoint());
    }
  }
  throw Error("no adjoint rule for " + kindName(c.kind()));
}

// ---------------------------------------------------------------------------
// Compositions
// ---------------------------------------------------------------------------

Verdict composeClasses(const OperatorClass& A, const OperatorClass& B) {
  if (A.n() != B.n())
    throw Error("compose: operands carry different boundary dimensions");
  const int n = A.n();
  const Rat nr(n);
  const Kind ka = A.kind(), kb = B.kind();
  Verdict v;

  const bool aInt = (ka == Kind::ZeroInterior || ka == Kind::ZeroBInterior);
  const bool bInt = (kb == Kind::ZeroInterior || kb == Kind::ZeroBInterior);

  // --- symbolic interior after symbolic interior ---------------------------
  if (ka == Kind::ZeroBInterior && kb == Kind::ZeroBInterior) {
    v.ruleId = "thm:global-composition-0b-0b";
    if (!condGT(v, "E_rf+F_lf", A.at("rf").sum(B.at("lf")), Rat(-1)))
      return failed(std::move(v));
    IndexSet Et = extendedUnion(A.at("ff0"), A.at("ffb").shift(nr));
    IndexSet Ft = extendedUnion(B.at("ff0"), B.at("ffb").shift(nr));
    IndexSet Glf = extendedUnion({A.at("lf"), B.at("lf").sum(A.at("ffb")),
                                  B.at("lf").sum(Et)});
    IndexSet Grf = extendedUnion({B.at("rf"), A.at("rf").sum(B.at("ffb")),
                                  A.at("rf").sum(Ft)});
    IndexSet Gffb = extendedUnion(A.at("ffb").sum(B.at("ffb")),
                                  A.at("lf").sum(B.at("rf")).shift(Rat(1)));
    IndexSet Gff0 = A.at("ff0").sum(B.at("ff0"));
    return okWith(std::move(v),
                  OperatorClass::make(Kind::ZeroBInterior, n,
                                      {{"lf", std::move(Glf)},
                                       {"rf", std::move(Grf)},
                                       {"ffb", std::move(Gffb)},
                                       {"ff0", std::move(Gff0)}}));
  }
  if (aInt && bInt) {
    v.ruleId = "thm:compositions-involving-interior";
    if (!condGT(v, "E_rf+F_lf", A.at("rf").sum(B.at("lf")), Rat(-1)))
      return failed(std::move(v));
    IndexSet Gff0 = A.at("ff0").sum(B.at("ff0"));
    IndexSet lf = (ka == Kind::ZeroBInterior)
                      ? extendedUnion(A.at("lf"), B.at("lf").sum(A.at("ffb")))
                      : A.at("lf");
    IndexSet rf = (kb == Kind::ZeroBInterior)
                      ? extendedUnion(B.at("rf"), A.at("rf").sum(B.at("ffb")))
                      : B.at("rf");
    return okWith(std::move(v),
                  OperatorClass::make(Kind::ZeroInterior, n,
                                      {{"lf", std::move(lf)},
                                       {"rf", std::move(rf)},
                                       {"ff0", std::move(Gff0)}}));
  }

  // --- trace / Poisson / boundary ------------------------------------------
  if (ka == Kind::ZeroPoisson && kb == Kind::Boundary) {
    v.ruleId = "thm:compositions-involving-boundary";
    return okWith(std::move(v),
                  OperatorClass::make(Kind::ZeroPoisson, n,
                                      {{"of", A.at("of")},
                                       {"ff", A.at("ff").sum(B.at("set"))}}));
  }
  if (ka == Kind::Boundary && kb == Kind::ZeroTrace) {
    v.ruleId = "thm:compositions-involving-boundary";
    return okWith(std::move(v),
                  OperatorClass::make(Kind::ZeroTrace, n,
                                      {{"of", B.at("of")},
                                       {"ff", B.at("ff").sum(A.at("set"))}}));
  }
  if (ka == Kind::ZeroPoisson && kb == Kind::ZeroTrace) {
    v.ruleId = "thm:compositions-involving-boundary";
    return okWith(std::move(v),
                  OperatorClass::make(Kind::ZeroInterior, n,
                                      {{"lf", A.at("of")},
                                       {"rf", B.at("of")},
                                       {"ff0", A.at("ff").sum(B.at("ff"))}}));
  }
  if (ka == Kind::ZeroTrace && kb == Kind::ZeroPoisson) {
    v.ruleId = "thm:compositions-involving-boundary";
    if (!condGT(v, "E_of+F_of", A.at("of").sum(B.at("of")), Rat(-1)))
      return failed(std::move(v));
    return okWith(std::move(v),
                  OperatorClass::make(Kind::Boundary, n,
                                      {{"set", A.at("ff").sum(B.at("ff"))}}));
  }

  // --- interior after Poisson / trace after interior -----------------------
  if (aInt && kb == Kind::ZeroPoisson) {
    v.ruleId = "thm:compositions-mixed";
    if (!condGT(v, "E_rf+F_of", A.at("rf").sum(B.at("of")), Rat(-1)))
      return failed(std::move(v));
    IndexSet of = (ka == Kind::ZeroBInterior)
                      ? extendedUnion(A.at("lf"), B.at("of").sum(A.at("ffb")))
                      : A.at("lf");
    return okWith(std::move(v),
                  OperatorClass::make(Kind::ZeroPoisson, n,
                                      {{"of", std::move(of)},
                                       {"ff", B.at("ff").sum(A.at("ff0"))}}));
  }
  if (ka == Kind::ZeroTrace && bInt) {
    v.ruleId = "thm:compositions-mixed";
    if (!condGT(v, "E_of+F_lf", A.at("of").sum(B.at("lf")), Rat(-1)))
      return failed(std::move(v));
    IndexSet of = (kb == Kind::ZeroBInterior)
                      ? extendedUnion(B.at("rf"), A.at("of").sum(B.at("ffb")))
                      : B.at("rf");
    return okWith(std::move(v),
                  OperatorClass::make(Kind::ZeroTrace, n,
                                      {{"of", std::move(of)},
                                       {"ff", A.at("ff").sum(B.at("ff0"))}}));
  }

  // --- twisted rules --------------------------------------------------------
  if (ka == Kind::TwistedZeroPoisson && kb == Kind::TwistedBoundary) {
    v.ruleId = "thm:twisted-compositions";
    if (!condTwistEq(v, "twist(P.dom) vs twist(K.cod)", *A.twistDom(), *B.twistCod()))
      return failed(std::move(v));
    return okWith(std::move(v),
                  OperatorClass::makeTwisted(Kind::TwistedZeroPoisson, n, A.at("of"),
                                             leadOfSum(A.at("ff"), B.at("set")),
                                             *B.twistDom()));
  }
  if (ka == Kind::TwistedBoundary && kb == Kind::TwistedZeroTrace) {
    v.ruleId = "thm:twisted-compositions";
    if (!condTwistEq(v, "twist(K.dom) vs twist(T.twist)", *A.twistDom(), *B.twistDom()))
      return failed(std::move(v));
    return okWith(std::move(v),
                  OperatorClass::makeTwisted(Kind::TwistedZeroTrace, n, B.at("of"),
                                             leadOfSum(B.at("ff"), A.at("set")),
                                             *A.twistCod()));
  }
  if (ka == Kind::TwistedZeroPoisson && kb == Kind::TwistedZeroTrace) {
    v.ruleId = "thm:twisted-compositions";
    if (!condTwistEq(v, "twist(P) vs twist(T)", *A.twistDom(), *B.twistDom()))
      return failed(std::move(v));
    OperatorClassBuilder b(Kind::ZeroInterior, n);
    b.set("lf", A.at("of"))
        .set("rf", B.at("of"))
        .set("ff0", IndexSet::fromGenerators(leadOfSum(A.at("ff"), B.at("ff"))))
        .leadingOnly("ff0");
    return okWith(std::move(v), b.finish());
  }
  if (ka == Kind::TwistedZeroTrace && kb == Kind::TwistedZeroPoisson) {
    v.ruleId = "thm:twisted-compositions";
    if (!condGT(v, "E_of+F_of", A.at("of").sum(B.at("of")), Rat(-1)))
      return failed(std::move(v));
    return okWith(std::move(v),
                  OperatorClass::makeTwistedBoundary(
                      n, leadOfSum(A.at("ff"), B.at("ff")), *B.twistDom(),
                      *A.twistDom()));
  }
  if (ka == Kind::TwistedBoundary && kb == Kind::TwistedBoundary) {
    v.ruleId = "thm:twisted-compositions";
    if (!condTwistEq(v, "twist(lhs.dom) vs twist(rhs.cod)", *A.twistDom(), *B.twistCod()))
      return failed(std::move(v));
    return okWith(std::move(v),
                  OperatorClass::makeTwistedBoundary(
                      n, leadOfSum(A.at("set"), B.at("set")), *B.twistDom(),
                      *A.twistCod()));
  }
  if (aInt && kb == Kind::TwistedZeroPoisson) {
    v.ruleId = "thm:twisted-compositions";
    if (!condGT(v, "E_rf+F_of", A.at("rf").sum(B.at("of")), Rat(-1)))
      return failed(std::move(v));
    IndexSet of = (ka == Kind::ZeroBInterior)
                      ? extendedUnion(A.at("lf"), B.at("of").sum(A.at("ffb")))
                      : A.at("lf");
    return okWith(std::move(v),
                  OperatorClass::makeTwisted(Kind::TwistedZeroPoisson, n,
                                             std::move(of),
                                             leadOfSum(B.at("ff"), A.at("ff0")),
                                             *B.twistDom()));
  }
  if (ka == Kind::TwistedZeroTrace && bInt) {
    v.ruleId = "thm:twisted-compositions";
    if (!condGT(v, "E_of+F_lf", A.at("of").sum(B.at("lf")), Rat(-1)))
      return failed(std::move(v));
    IndexSet of = (kb == Kind::ZeroBInterior)
                      ? extendedUnion(B.at("rf"), A.at("of").sum(B.at("ffb")))
                      : B.at("rf");
    return okWith(std::move(v),
                  OperatorClass::makeTwisted(Kind::TwistedZeroTrace, n,
                                             std::move(of),
                                             leadOfSum(A.at("ff"), B.at("ff0")),
                                             *A.twistDom()));
  }

  if (ka == Kind::ZeroCalc && kb == Kind::ZeroCalc)
    return Verdict::noRule(
        "no direct composition for ZeroCalc after ZeroCalc; include the factors "
        "into symbolic interior classes first");
  return Verdict::noRule("no composition rule for " + kindName(ka) + " after " +
                         kindName(kb));
}

std::vector<CompositionRuleInfo> compositionRules() {
  return {
      {Kind::ZeroBInterior, Kind::ZeroBInterior, "thm:global-composition-0b-0b"},
      {Kind::ZeroInterior, Kind::ZeroInterior, "thm:compositions-involving-interior"},
      {Kind::ZeroBInterior, Kind::ZeroInterior, "thm:compositions-involving-interior"},
      {Kind::ZeroInterior, Kind::ZeroBInterior, "thm:compositions-involving-interior"},
      {Kind::ZeroPoisson, Kind::Boundary, "thm:compositions-involving-boundary"},
      {Kind::Boundary, Kind::ZeroTrace, "thm:compositions-involving-boundary"},
      {Kind::ZeroPoisson, Kind::ZeroTrace, "thm:compositions-involving-boundary"},
      {Kind::ZeroTrace, Kind::ZeroPoisson, "thm:compositions-involving-boundary"},
      {Kind::ZeroInterior, Kind::ZeroPoisson, "thm:compositions-mixed"},
      {Kind::ZeroBInterior, Kind::ZeroPoisson, "thm:compositions-mixed"},
      {Kind::ZeroTrace, Kind::ZeroInterior, "thm:compositions-mixed"},
      {Kind::ZeroTrace, Kind::ZeroBInterior, "thm:compositions-mixed"},
      {Kind::TwistedZeroPoisson, Kind::TwistedBoundary, "thm:twisted-compositions"},
      {Kind::TwistedBoundary, Kind::TwistedZeroTrace, "thm:twisted-compositions"},
      {Kind::TwistedZeroPoisson, Kind::TwistedZeroTrace, "thm:twisted-compositions"},
      {Kind::TwistedZeroTrace, Kind::TwistedZeroPoisson, "thm:twisted-compositions"},
      {Kind::TwistedBoundary, Kind::TwistedBoundary, "thm:twisted-compositions"},
      {Kind::ZeroInterior, Kind::TwistedZeroPoisson, "thm:twisted-compositions"},
      {Kind::ZeroBInterior, Kind::TwistedZeroPoisson, "thm:twisted-compositions"},
      {Kind::TwistedZeroTrace, Kind::ZeroInterior, "thm:twisted-compositions"},
      {Kind::TwistedZeroTrace, Kind::ZeroBInterior, "thm:twisted-compositions"},
  };
}

// ---------------------------------------------------------------------------
// Bessel-degree bookkeeping
// ---------------------------------------------------------------------------

BesselDegreeInfo besselDegree(const OperatorClass& c) {
  std::string face;
  switch (c.kind()) {
    case Kind::ZeroInterior:
    case Kind::ZeroBInterior:
    case Kind::ZeroCalc:
    case Kind::ExtZeroCalc:
      face = "ff0";
      break;
    case Kind::ZeroTrace:
    case Kind::ZeroPoisson:
    case Kind::TwistedZeroTrace:
    case Kind::TwistedZeroPoisson:
      face = "ff";
      break;
    case Kind::Boundary:
    case Kind::TwistedBoundary:
      face = "set";
      break;
    default:
      throw Error("no Bessel family for " + kindName(c.kind()));
  }
  std::vector<Generator> lead = c.leading(face);
  if (lead.size() != 1 || lead[0].l != 0)
    throw Error("Bessel degree needs a single log-free leading point at " + face +
                ", got " + leadStr(lead));
  BesselDegreeInfo info;
  info.degree = -lead[0].alpha;
  info.twisted = kindIsTwisted(c.kind());
  switch (c.kind()) {
    case Kind::ZeroPoisson:
      info.pattern = "lambda_t* Nhat_eta t^(-m)";
      break;
    case Kind::TwistedZeroPoisson:
      info.pattern = "lambda_t* Nhat_eta t^(-m+s)";
      break;
    case Kind::ZeroTrace:
      info.pattern = "t^(-m) Nhat_eta lambda_{1/t}*";
      break;
    case Kind::TwistedZeroTrace:
      info.pattern = "t^(-m-s) Nhat_eta lambda_{1/t}*";
      break;
    case Kind::Boundary:
      info.pattern = "t^(-m) Nhat_eta";
      break;
    case Kind::TwistedBoundary:
      info.pattern = "t^(-m) t^t Nhat_eta t^(-s)";
      break;
    default:
      info.pattern = "t^(-m) lambda_t* Nhat_eta lambda_{1/t}*";
      break;
  }
  return info;
}

// ---------------------------------------------------------------------------
// Mapping / compactness verdicts
// ---------------------------------------------------------------------------

Verdict mappingVerdict(const OperatorClass& c, const Rat& delta,
                       MappingQuestion question, const IndexSet& input) {
  Verdict v;
  const Kind k = c.kind();

  if (question == MappingQuestion::Phg) {
    switch (k) {
      case Kind::ZeroTrace: {
        v.ruleId = "thm:mapping-properties-on-phg-untwisted";
        if (!condGT(v, "E_of+F", c.at("of").sum(input), Rat(0)))
          return failed(std::move(v));
        v.notes.push_back("maps phg(F) into C^inf(boundary)");
        v.status = Status::Ok;
        return v;
      }
      case Kind::ZeroPoisson: {
        v.ruleId = "thm:mapping-properties-on-phg-untwisted";
        v.notes.push_back("maps C^inf(boundary) into phg(" + c.at("of").str() + ")");
        v.status = Status::Ok;
        return v;
      }
      case Kind::ZeroInterior: {
        v.ruleId = "thm:mapping-properties-on-phg-untwisted";
        if (!condGT(v, "E_rf+F", c.at("rf").sum(input), Rat(-1)))
          return failed(std::move(v));
        v.notes.push_back("maps phg(F) into phg(" + c.at("lf").str() + ")");
        v.status = Status::Ok;
        return v;
      }
      case Kind::ZeroBInterior: {
        v.ruleId = "thm:mapping-phg-0b-interior";
        if (!condGT(v, "E_rf+F", c.at("rf").sum(input), Rat(-1)))
          return failed(std::move(v));
        IndexSet out = extendedUnion(c.at("lf"), input.sum(c.at("ffb")));
        v.notes.push_back("maps phg(F) into phg(" + out.str() + ")");
        v.status = Status::Ok;
        return v;
      }
      default:
        return Verdict::noRule("no polyhomogeneous mapping rule for " + kindName(k));
    }
  }

  const bool compact = (question == MappingQuestion::SobolevCompact);

  switch (k) {
    case Kind::VeryResidual:
    case Kind::BCalc:
    case Kind::ZeroCalc:
    case Kind::ExtZeroCalc:
    case Kind::ZeroInterior:
    case Kind::ZeroBInterior: {
      v.ruleId = "cor:mapping-symbolic-0b-0-sobolev";
      if (compact && k == Kind::ZeroCalc && c.interiorOrder()) {
        v.conditions.push_back("FAIL finite interior order m=" +
                               std::to_string(*c.interiorOrder()) +
                               " obstructs compactness");
        return failed(std::move(v));
      }
      bool ok = condGT(v, "E_lf", c.at("lf"), delta);
      ok = condGT(v, "E_rf", c.at("rf"), -delta - 1) && ok;
      const auto& fs = c.faces();
      if (std::find(fs.begin(), fs.end(), "ff0") != fs.end())
        ok = (compact ? condGT(v, "E_ff0", c.at("ff0"), Rat(0))
                      : condGE(v, "E_ff0", c.at("ff0"), Rat(0))) &&
             ok;
      if (std::find(fs.begin(), fs.end(), "ffb") != fs.end())
        ok = condGT(v, "E_ffb", c.at("ffb"), Rat(0)) && ok;
      if (!ok) return failed(std::move(v));
      if (k == Kind::ZeroCalc && c.interiorOrder())
        v.notes.push_back("bounded x^delta*H_0^(k+" +
                          std::to_string(*c.interiorOrder()) +
                          ") -> x^delta*H_0^k");
      else
        v.notes.push_back(compact ? "compact on x^delta*H_0^k"
                                  : "bounded on x^delta*H_0^k");
      v.status = Status::Ok;
      return v;
    }
    case Kind::ZeroTrace:
    case Kind::TwistedZeroTrace: {
      v.ruleId = "thm:mapping-twisted-trace-interior-sobolev";
      if (compact) {
        v.conditions.push_back(
            "FAIL compact iff the Bessel family vanishes identically - not "
            "decidable from class data");
        return failed(std::move(v));
      }
      bool ok = condGT(v, "E_of", c.at("of"), -delta - 1);
      ok = condLeadZero(v, "E_ff", c, "ff") && ok;
      if (!ok) return failed(std::move(v));
      v.notes.push_back(k == Kind::ZeroTrace
                            ? "bounded x^delta*L_b^2 -> L^2(boundary)"
                            : "bounded x^delta*L_b^2 -> H^s(boundary), s = " +
                                  c.twistDom()->str());
      v.status = Status::Ok;
      return v;
    }
    case Kind::ZeroPoisson:
    case Kind::TwistedZeroPoisson: {
      v.ruleId = "thm:mapping-twisted-trace-interior-sobolev";
      if (compact) {
        v.conditions.push_back(
            "FAIL compact iff the Bessel family vanishes identically - not "
            "decidable from class data");
        return failed(std::move(v));
      }
      if (!condGT(v, "E_of", c.at("of"), delta)) return failed(std::move(v));
      v.notes.push_back(k == Kind::ZeroPoisson
                            ? "bounded L^2(boundary) -> x^delta*L_b^2"
                            : "bounded H^s(boundary) -> x^delta*L_b^2, s = " +
                                  c.twistDom()->str());
      v.status = Status::Ok;
      return v;
    }
    case Kind::Boundary:
    case Kind::TwistedBoundary: {
      v.ruleId = "prop:mapping-twisted-boundary-sobolev";
      if (compact) {
        v.conditions.push_back(
            "FAIL compact iff the principal symbol vanishes identically - not "
            "decidable from class data");
        return failed(std::move(v));
      }
      if (!condLeadZero(v, "G", c, "set")) return failed(std::move(v));
      v.notes.push_back(k == Kind::Boundary
                            ? "bounded L^2(boundary) -> L^2(boundary)"
                            : "bounded H^a -> H^b, a = " + c.twistDom()->str() +
                                  ", b = " + c.twistCod()->str());
      v.status = Status::Ok;
      return v;
    }
    default:
      return Verdict::noRule("no Sobolev mapping rule for " + kindName(k) +
                             "; include into a covered kind first");
  }
}

}  // namespace phg
