#include <doctest.h>

#include "phg/ledger.hpp"

using namespace phg;

namespace {

IndexSet make(std::initializer_list<std::pair<std::pair<int, int>, int>> items) {
  std::vector<Generator> g;
  for (const auto& [a, l] : items)
    g.emplace_back(ComplexExact(Rat(a.first, a.second)), l);
  return IndexSet::fromGenerators(std::move(g));
}

OperatorClass deskQ(int n) {
  Twist dom{{TwistBlock{ComplexExact(Rat(-1, 2)), 1}}};
  Twist cod{{TwistBlock{ComplexExact(Rat(0)), 1}}};
  return OperatorClass::makeTwistedBoundary(
      n, {Generator(ComplexExact(Rat(0)), 0)}, dom, cod);
}

}  // namespace

TEST_CASE("the desk example ledger") {
  LedgerInput in;
  in.specb = {{ComplexExact(Rat(1, 2)), 0}, {ComplexExact(Rat(-1, 2)), 0}};
  in.delta = 0;
  in.deltaBar = Rat(1, 2);
  in.m = 2;
  in.n = 2;
  Ledger led = parametrixLedger(in, deskQ(2));

  CHECK(led.Elf == make({{{1, 2}, 0}}));
  CHECK(led.Erf == make({{{-1, 2}, 0}}));
  CHECK(led.sL == Twist{{TwistBlock{ComplexExact(Rat(1, 2)), 1}}});
  CHECK(led.ok());

  SUBCASE("the twisted chain carries the boundary twist through") {
    const LedgerStep& c0 = led.step("C0");
    REQUIRE(c0.cls.has_value());
    CHECK(c0.cls->kind() == Kind::TwistedZeroPoisson);
    CHECK(c0.cls->at("of") == led.Elf);
    CHECK(c0.cls->twistDom()->blocks[0].mu == ComplexExact(Rat(0)));

    const LedgerStep& qa = led.step("QA");
    REQUIRE(qa.cls.has_value());
    CHECK(qa.cls->kind() == Kind::TwistedZeroTrace);
    CHECK(qa.cls->at("of") == led.Erf);

    const LedgerStep& cqa = led.step("C0QA");
    REQUIRE(cqa.cls.has_value());
    CHECK(cqa.cls->kind() == Kind::ZeroInterior);
    CHECK(cqa.cls->isLeadingOnly("ff0"));
    CHECK(std::find(cqa.conditions.begin(), cqa.conditions.end(),
                    "OK Re(E_lf+E_rf)=0 > -1") != cqa.conditions.end());
  }
  SUBCASE("interior steps satisfy the displayed inequalities") {
    const LedgerStep& g1 = led.step("G1");
    REQUIRE(g1.cls.has_value());
    CHECK(g1.cls->interiorOrder() == -2);
    CHECK(g1.conditions ==
          std::vector<std::string>{"OK Re(H_lf)=1/2 > 0", "OK Re(H_rf)=-1/2 > -1",
                                   "OK lead(H_ff0)={(0,0)}"});
    const LedgerStep& t0 = led.step("T0");
    CHECK(t0.cls->at("ff0") == make({{{1, 1}, 0}}));
  }
  SUBCASE("both remainders are very residual with the strip index sets") {
    const LedgerStep& r = led.step("R_left");
    REQUIRE(r.cls.has_value());
    CHECK(*r.cls == OperatorClass::make(Kind::VeryResidual, 2,
                                        {{"lf", make({{{1, 2}, 0}})},
                                         {"rf", make({{{-1, 2}, 0}})}}));
    // The desk example is symmetric under the weighted adjoint, so the right
    // remainder coincides with the left one.
    CHECK(*led.step("R_right").cls == *r.cls);
    CHECK(led.step("P2").cls->at("lf") == led.Elf);
  }
  CHECK_THROWS_AS(led.step("nope"), Error);
}

TEST_CASE("integer-spaced critical roots stack log orders into block sizes") {
  LedgerInput in;
  in.specb = {{ComplexExact(Rat(0)), 0}, {ComplexExact(Rat(1)), 0}};
  in.delta = Rat(-1, 2);
  in.deltaBar = 1;
  in.m = 2;
  in.n = 1;
  Twist dom{{TwistBlock{ComplexExact(Rat(0)), 1}, TwistBlock{ComplexExact(Rat(-1)), 2}}};
  Twist cod{{TwistBlock{ComplexExact(Rat(0)), 1}}};
  OperatorClass Q = OperatorClass::makeTwistedBoundary(
      1, {Generator(ComplexExact(Rat(0)), 0)}, dom, cod);
  Ledger led = parametrixLedger(in, Q);
  REQUIRE(led.sL.blocks.size() == 2);
  CHECK(led.sL.blocks[0] == TwistBlock{ComplexExact(Rat(0)), 1});
  CHECK(led.sL.blocks[1] == TwistBlock{ComplexExact(Rat(1)), 2});
  CHECK(led.Elf == IndexSet::fromGenerators(
                       {Generator(ComplexExact(Rat(0)), 0),
                        Generator(ComplexExact(Rat(1)), 1)}));
}

TEST_CASE("ledger preconditions") {
  LedgerInput in;
  in.specb = {{ComplexExact(Rat(1, 2)), 0}};
  in.delta = Rat(1, 2);
  in.deltaBar = Rat(1, 2);
  in.m = 2;
  in.n = 2;
  CHECK_THROWS_AS(parametrixLedger(in, deskQ(2)), Error);  // empty strip

  in.delta = 0;
  in.deltaBar = Rat(1, 4);
  CHECK_THROWS_AS(parametrixLedger(in, deskQ(2)), Error);  // no critical root

  in.deltaBar = Rat(1, 2);
  Twist wrong{{TwistBlock{ComplexExact(Rat(1, 2)), 1}}};
  OperatorClass Qbad = OperatorClass::makeTwistedBoundary(
      2, {Generator(ComplexExact(Rat(0)), 0)}, wrong, wrong);
  CHECK_THROWS_AS(parametrixLedger(in, Qbad), Error);  // twist mismatch

  OperatorClass notBoundary = OperatorClass::make(
      Kind::Boundary, 2, {{"set", IndexSet::nat()}});
  CHECK_THROWS_AS(parametrixLedger(in, notBoundary), Error);
}

TEST_CASE("ledger text report is stable") {
  LedgerInput in;
  in.specb = {{ComplexExact(Rat(1, 2)), 0}};
  in.delta = 0;
  in.deltaBar = Rat(1, 2);
  in.m = 2;
  in.n = 2;
  Ledger led = parametrixLedger(in, deskQ(2));
  std::string s = led.str();
  CHECK(s.substr(0, 46) == "E_lf={(1/2,0)} E_rf={(-1/2,0)} s_L=[(1/2,1)]\n ");
  CHECK(s.find("R_left") != std::string::npos);
  CHECK(led.str() == s);
}
