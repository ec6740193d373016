#pragma once
// Step-by-step bookkeeping for the parametrix construction of an elliptic
// boundary value problem at weight delta: indicial data in the critical strip,
// the twisted trace / Poisson / boundary classes built from them, their
// compositions, and the residual remainder classes, each step carrying the
// rule that licenses it and the inequalities it checked.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "phg/rules.hpp"

namespace phg {

struct LedgerInput {
  // Indicial roots with their multiplicities (block size minus one).
  std::vector<std::pair<ComplexExact, int>> specb;
  Rat delta;     // weight of the x^delta L_b^2 problem
  Rat deltaBar;  // upper edge of the critical strip (delta, deltaBar]
  int m = 2;     // interior order of the operator
  int n = 1;     // boundary dimension
};

struct LedgerStep {
  std::string name;
  std::string ruleId;
  std::optional<OperatorClass> cls;
  std::vector<std::string> conditions;
  std::vector<std::string> notes;
  bool ok = true;

  std::string str() const;
};

struct Ledger {
  IndexSet Elf;  // output-face set over the roots right of the weight line
  IndexSet Erf;  // its dual under the weighted pairing
  Twist sL;      // twist assembled from the critical roots
  std::vector<LedgerStep> steps;

  bool ok() const;
  const LedgerStep& step(const std::string& name) const;  // throws if absent
  std::string str() const;
};

// Runs the construction for input data L and boundary operator Q (a
// TwistedBoundary class whose twist domain is the negative of sL).
// Throws on delta >= deltaBar or a Q that cannot close the chain; a failed
// Re-inequality inside the chain is recorded on its step instead.
Ledger parametrixLedger(const LedgerInput& in, const OperatorClass& Q);

}  // namespace phg
