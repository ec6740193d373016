#pragma once
// The declarative rule set on operator classes: inclusions between calculi,
// Fourier-transform rules, formal adjoints, compositions (twisted and
// untwisted), Bessel-degree bookkeeping, and mapping/compactness verdicts.
// Each rule is one data record so coverage is auditable.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "phg/operator_class.hpp"

namespace phg {

struct Verdict {
  enum class Status { Ok, Fails, NoRule };
  Status status = Status::NoRule;
  std::optional<OperatorClass> result;  // present iff a class was produced
  std::string ruleId;                   // citation tag of the licensing rule
  // Human-readable evaluations, e.g. "OK Re(E_rf+F_lf)=1/2 > -1".
  std::vector<std::string> conditions;
  std::vector<std::string> notes;  // e.g. domain/codomain labels of verdicts

  bool ok() const { return status == Status::Ok; }
  static Verdict noRule(std::string why);
  static Verdict fails(std::string ruleId, std::string condition);
  std::string str() const;
};

// ---- inclusions / conversions -------------------------------------------
Verdict includeInto(const OperatorClass& c, Kind target);

// ---- Fourier rules -------------------------------------------------------
enum class FourierDirection { ToPhysical, ToSymbolic };
Verdict fourierRule(FourierDirection dir, const OperatorClass& c);

// ---- adjoints ------------------------------------------------------------
// Formal adjoint in x^delta L_b^2. Throws on kinds without an adjoint rule.
OperatorClass adjointClass(const OperatorClass& c, const Rat& delta);

// ---- compositions --------------------------------------------------------
// A after B. Checks the licensing theorem's Re-inequality exactly, computes
// the result family, and records the rule id.
Verdict composeClasses(const OperatorClass& A, const OperatorClass& B);

// One record per composition rule, for audit/testing.
struct CompositionRuleInfo {
  Kind lhs, rhs;
  std::string id;
};
std::vector<CompositionRuleInfo> compositionRules();

// ---- Bessel-degree bookkeeping ------------------------------------------
// Requires the leading set of the front face to be one log-free point (m,0).
struct BesselDegreeInfo {
  ComplexExact degree;   // -m
  bool twisted = false;
  std::string pattern;   // conjugation slots of the dilation law
};
BesselDegreeInfo besselDegree(const OperatorClass& c);  // throws Error otherwise

// ---- mapping / compactness verdicts -------------------------------------
enum class MappingQuestion { Phg, SobolevBounded, SobolevCompact };
// `input`: index set of the polyhomogeneous input (Phg question only);
// defaults to N = {(0,0)}, i.e. smooth input.
Verdict mappingVerdict(const OperatorClass& c, const Rat& delta,
                       MappingQuestion question,
                       const IndexSet& input = IndexSet::nat());

}  // namespace phg
