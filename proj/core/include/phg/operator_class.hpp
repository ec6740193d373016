#pragma once
// Descriptors for the calculus classes: tagged index families with order and
// twist data. The rule set acting on them lives in rules.hpp.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "phg/index_set.hpp"

namespace phg {

enum class Kind {
  VeryResidual,     // (lf, rf)
  ResidualTrace,    // (of)
  ResidualPoisson,  // (of)
  BCalc,            // (lf, rf, ffb)
  ZeroCalc,         // (lf, rf, ff0), interior order m or -infinity
  ExtZeroCalc,      // (lf, rf, ffb, ff0)
  ZeroInterior,     // (lf, rf, ff0)           symbolic interior class
  ZeroBInterior,    // (lf, rf, ffb, ff0)      symbolic interior class
  ZeroTrace,        // (of, ff)
  ZeroPoisson,      // (of, ff)
  Boundary,         // (set) pseudodifferential operator on the boundary
  TwistedZeroTrace,    // (of, [ff] leading, twist s)
  TwistedZeroPoisson,  // (of, [ff] leading, twist s)
  TwistedBoundary,     // ([set] leading, twist dom s, twist cod t)
};

std::string kindName(Kind k);
std::optional<Kind> kindFromName(const std::string& name);
// Full index-set faces carried by a kind, in print order.
const std::vector<std::string>& kindFaces(Kind k);
bool kindIsTwisted(Kind k);

// One generalized eigenblock of a twist endomorphism: eigenvalue mu acting on
// the span of x^mu log^l x, l <= size-1.
struct TwistBlock {
  ComplexExact mu;
  int size = 1;  // M + 1
  bool operator==(const TwistBlock& o) const { return mu == o.mu && size == o.size; }
};

// Direct sum of blocks; models the endomorphisms s and t.
struct Twist {
  std::vector<TwistBlock> blocks;

  int dim() const;
  bool operator==(const Twist& o) const { return blocks == o.blocks; }
  // -s* : negate and conjugate every eigenvalue (sizes kept).
  Twist negAdjoint() const;
  std::string str() const;  // "[(1/2,1),(0,2)]" as (mu, size)
};

class OperatorClass {
public:
  OperatorClass() = default;
  // `sets` must provide exactly kindFaces(kind); twisted kinds take their
  // leading set and twists through the dedicated fields.
  static OperatorClass make(Kind kind, int n, std::map<std::string, IndexSet> sets,
                            std::optional<int> interiorOrder = std::nullopt);
  static OperatorClass makeTwisted(Kind kind, int n, IndexSet ofSet,
                                   std::vector<Generator> leading, Twist twist);
  static OperatorClass makeTwistedBoundary(int n, std::vector<Generator> leading,
                                           Twist dom, Twist cod);

  Kind kind() const { return kind_; }
  int n() const { return n_; }
  const IndexSet& at(const std::string& face) const;
  // Leading set of a face: the stored finite set for leading-only faces,
  // otherwise computed from the full set.
  std::vector<Generator> leading(const std::string& face) const;
  bool isLeadingOnly(const std::string& face) const;
  const std::vector<std::string>& faces() const;

  // Interior conormal order of the physical calculi; empty means -infinity.
  std::optional<int> interiorOrder() const { return interiorOrder_; }
  const std::optional<Twist>& twistDom() const { return twistDom_; }
  const std::optional<Twist>& twistCod() const { return twistCod_; }

  bool operator==(const OperatorClass& o) const;
  std::string str() const;

private:
  Kind kind_ = Kind::VeryResidual;
  int n_ = 1;
  std::map<std::string, IndexSet> sets_;
  std::set<std::string> leadingOnly_;  // faces whose set is trusted to leading order
  std::optional<int> interiorOrder_;
  std::optional<Twist> twistDom_;  // single twist of trace/Poisson kinds too
  std::optional<Twist> twistCod_;

  friend class OperatorClassBuilder;
};

// Internal helper used by the rule engine to assemble results (including
// leading-only faces on untwisted kinds).
class OperatorClassBuilder {
public:
  OperatorClassBuilder(Kind kind, int n) {
    c_.kind_ = kind;
    c_.n_ = n;
  }
  OperatorClassBuilder& set(const std::string& face, IndexSet e);
  OperatorClassBuilder& leadingOnly(const std::string& face);
  OperatorClassBuilder& interiorOrder(std::optional<int> m);
  OperatorClassBuilder& twists(std::optional<Twist> dom, std::optional<Twist> cod);
  OperatorClass finish();

private:
  OperatorClass c_;
};

}  // namespace phg
