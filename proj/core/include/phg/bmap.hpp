#pragma once
// Model spaces, boundary matrices of b-maps, and the pull-back/push-forward
// action on index families. The finitely many maps the composition theorems
// rely on ship in a registry; custom maps can be declared by matrix.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "phg/index_set.hpp"

namespace phg {

struct ModelSpace {
  std::string name;
  std::vector<std::string> faces;  // unique, in canonical print order

  bool hasFace(const std::string& f) const;
};

// Assignment of an index set to every face of a space.
class IndexFamily {
public:
  IndexFamily() = default;
  IndexFamily(ModelSpace space, std::map<std::string, IndexSet> sets);

  const ModelSpace& space() const { return space_; }
  const IndexSet& at(const std::string& face) const;
  void set(const std::string& face, IndexSet e);
  bool operator==(const IndexFamily& o) const;

  std::string str() const;  // "lf={...} rf={...} ..." in face order

private:
  ModelSpace space_;
  std::map<std::string, IndexSet> sets_;
};

// A b-map source -> target carried as its boundary exponent matrix
// e(G, H) >= 0, indexed by (target face G, source face H), plus the source
// faces mapped into the target's interior.
struct BMap {
  std::string name;
  ModelSpace source;
  ModelSpace target;
  std::map<std::string, std::map<std::string, int>> e;  // e[G][H]
  std::set<std::string> interiorFaces;                   // subset of source faces

  int exponent(const std::string& G, const std::string& H) const;
  // Every source face must either hit some target face or be interior.
  void validate() const;
};

// Pull-back: (f^b F)_H = N + sum over target faces G of e(G,H)-fold F_G.
// All-zero columns and interior faces receive N = {(0,0)}.
IndexFamily pullbackFamily(const BMap& f, const IndexFamily& F);

// Push-forward: (f_b E)_G = extended union over {H : e(G,H) > 0} of
// E_H with exponents divided by e(G,H). Integrability requires Re(E_H) > 0
// on every interior-mapped face; violations are reported, not silently
// dropped.
struct PushforwardResult {
  IndexFamily family;
  struct Violation {
    std::string face;
    std::optional<Rat> infRe;  // empty only if the face set is INF (never violates)
  };
  std::vector<Violation> violations;  // empty iff integrable
  bool ok() const { return violations.empty(); }
};
PushforwardResult pushforwardFamily(const BMap& f, const IndexFamily& E);

// Registry of the model spaces and b-maps used by the theorems.
const ModelSpace& registrySpace(const std::string& name);  // throws on unknown
const BMap& registryBMap(const std::string& name);         // throws on unknown
std::vector<std::string> registryBMapNames();
std::vector<std::string> registrySpaceNames();

// Density re-bundling exponents that the composition/mapping proofs apply
// before pushing forward, recorded per rule id. Unknown ids throw.
const std::map<std::string, int>& registryDensityShift(const std::string& ruleId);
std::vector<std::string> registryDensityShiftIds();
bool densityShiftCheck(const std::string& ruleId,
                       const std::map<std::string, int>& declared);

}  // namespace phg
