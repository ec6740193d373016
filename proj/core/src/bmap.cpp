#include "phg/bmap.hpp"

#include <algorithm>

namespace phg {

bool ModelSpace::hasFace(const std::string& f) const {
  return std::find(faces.begin(), faces.end(), f) != faces.end();
}

IndexFamily::IndexFamily(ModelSpace space, std::map<std::string, IndexSet> sets)
    : space_(std::move(space)), sets_(std::move(sets)) {
  for (const auto& f : space_.faces)
    if (!sets_.count(f)) throw Error("index family misses face '" + f + "'");
  for (const auto& [f, e] : sets_)
    if (!space_.hasFace(f))
      throw Error("index family names unknown face '" + f + "'");
}

const IndexSet& IndexFamily::at(const std::string& face) const {
  auto it = sets_.find(face);
  if (it == sets_.end()) throw Error("unknown face '" + face + "'");
  return it->second;
}

void IndexFamily::set(const std::string& face, IndexSet e) {
  if (!space_.hasFace(face)) throw Error("unknown face '" + face + "'");
  sets_[face] = std::move(e);
}

bool IndexFamily::operator==(const IndexFamily& o) const {
  return space_.name == o.space_.name && space_.faces == o.space_.faces &&
         sets_ == o.sets_;
}

std::string IndexFamily::str() const {
  std::string s;
  for (const auto& f : space_.faces) {
    if (!s.empty()) s += " ";
    s += f + "=" + at(f).str();
  }
  return s;
}

int BMap::exponent(const std::string& G, const std::string& H) const {
  auto row = e.find(G);
  if (row == e.end()) return 0;
  auto it = row->second.find(H);
  return it == row->second.end() ? 0 : it->second;
}

void BMap::validate() const {
  for (const auto& [G, row] : e) {
    if (!target.hasFace(G)) throw Error("b-map row for unknown target face '" + G + "'");
    for (const auto& [H, v] : row) {
      if (!source.hasFace(H))
        throw Error("b-map column for unknown source face '" + H + "'");
      if (v < 0) throw Error("b-map exponents must be nonnegative");
    }
  }
  for (const auto& H : interiorFaces)
    if (!source.hasFace(H))
      throw Error("interior face '" + H + "' not a source face");
  for (const auto& H : source.faces) {
    bool hit = interiorFaces.count(H) > 0;
    for (const auto& G : target.faces) hit = hit || exponent(G, H) > 0;
    if (!hit)
      throw Error("source face '" + H + "' neither hits a target face nor the interior");
  }
}

IndexFamily pullbackFamily(const BMap& f, const IndexFamily& F) {
  if (F.space().name != f.target.name)
    throw Error("pullback: family lives on '" + F.space().name + "', map targets '" +
                f.target.name + "'");
  std::map<std::string, IndexSet> out;
  for (const auto& H : f.source.faces) {
    // (f^b F)_H = N + sum_G e(G,H) * F_G; the e-fold sum absorbs INF, and an
    // empty sum (all-zero column or interior face) leaves N = {(0,0)}.
    IndexSet acc = IndexSet::nat();
    for (const auto& G : f.target.faces)
      for (int k = 0; k < f.exponent(G, H); ++k) acc = acc.sum(F.at(G));
    out[H] = acc;
  }
  return IndexFamily(f.source, std::move(out));
}

PushforwardResult pushforwardFamily(const BMap& f, const IndexFamily& E) {
  if (E.space().name != f.source.name)
    throw Error("pushforward: family lives on '" + E.space().name + "', map starts at '" +
                f.source.name + "'");
  PushforwardResult res;
  for (const auto& H : f.interiorFaces) {
    const IndexSet& s = E.at(H);
    if (!s.reGreaterThan(0)) res.violations.push_back({H, s.infRe()});
  }
  std::sort(res.violations.begin(), res.violations.end(),
            [](const auto& a, const auto& b) { return a.face < b.face; });
  std::map<std::string, IndexSet> out;
  for (const auto& G : f.target.faces) {
    std::vector<IndexSet> parts;
    for (const auto& H : f.source.faces) {
      int e = f.exponent(G, H);
      if (e > 0) parts.push_back(E.at(H).divideExponents(e));
    }
    out[G] = parts.empty() ? IndexSet::inf() : extendedUnion(parts);
  }
  res.family = IndexFamily(f.target, std::move(out));
  return res;
}

namespace {

ModelSpace space(std::string name, std::vector<std::string> faces) {
  return ModelSpace{std::move(name), std::move(faces)};
}

BMap makeMap(std::string name, ModelSpace src, ModelSpace tgt,
             std::map<std::string, std::map<std::string, int>> e,
             std::set<std::string> interior) {
  BMap m{std::move(name), std::move(src), std::move(tgt), std::move(e),
         std::move(interior)};
  m.validate();
  return m;
}

struct Registry {
  std::map<std::string, ModelSpace> spaces;
  std::map<std::string, BMap> maps;
  std::map<std::string, std::map<std::string, int>> densityShifts;

  Registry() {
    auto add = [&](ModelSpace s) { spaces.emplace(s.name, s); };
    add(space("X2", {"lf", "rf"}));
    add(space("X02", {"lf", "rf", "ff0"}));
    add(space("Xb2", {"lf", "rf", "ffb"}));
    add(space("X0b2", {"lf", "rf", "ffb", "ff0"}));
    // Triple space for the 0b-0b composition; H100/H010/H001 are the lifts of
    // the three codimension-one boundary hypersurfaces, the ff_* faces come
    // from the four blow-ups.
    add(space("Z3", {"H100", "H010", "H001", "ff_T", "ff_LC0", "ff_LCb",
                     "ff_CRb", "ff_LRb"}));
    // Proof spaces for the mapping theorems: ef_* are the boundary faces in
    // the fibre variables, if_* the faces at infinity.
    add(space("Zb", {"lf", "rf", "ffb", "ff0", "ef_x", "ef_xt", "if_eta",
                     "if_x", "if_xt"}));
    add(space("Z", {"lf", "rf", "ff0", "ef_x", "ef_xt", "if_eta", "if_x",
                    "if_xt"}));
    // Model half-space square carrying trace/Poisson kernels.
    add(space("Phat0sq", {"of", "ff", "if_eta", "if_x"}));

    auto addMap = [&](BMap m) { maps.emplace(m.name, std::move(m)); };
    const ModelSpace& Z3 = spaces.at("Z3");
    addMap(makeMap(
        "gamma_CR", Z3, spaces.at("Xb2"),
        {{"lf", {{"H010", 1}, {"ff_LC0", 1}, {"ff_LCb", 1}}},
         {"rf", {{"H001", 1}, {"ff_LRb", 1}}},
         {"ffb", {{"ff_T", 1}, {"ff_CRb", 1}}}},
        {"H100"}));
    addMap(makeMap(
        "gamma_LR", Z3, spaces.at("Xb2"),
        {{"lf", {{"H100", 1}, {"ff_LC0", 1}, {"ff_LCb", 1}}},
         {"rf", {{"H001", 1}, {"ff_CRb", 1}}},
         {"ffb", {{"ff_T", 1}, {"ff_LRb", 1}}}},
        {"H010"}));
    addMap(makeMap(
        "gamma_LC", Z3, spaces.at("X0b2"),
        {{"lf", {{"H100", 1}, {"ff_LRb", 1}}},
         {"rf", {{"H010", 1}, {"ff_CRb", 1}}},
         {"ffb", {{"ff_T", 1}, {"ff_LCb", 1}}},
         {"ff0", {{"ff_LC0", 1}}}},
        {"H001"}));
    addMap(makeMap(
        "gamma_L_Zb", spaces.at("Zb"), spaces.at("Phat0sq"),
        {{"of", {{"lf", 1}, {"ffb", 1}}},
         {"ff", {{"ff0", 1}, {"ef_x", 1}}},
         {"if_eta", {{"if_eta", 1}, {"ef_xt", 1}}},
         {"if_x", {{"if_x", 1}}}},
        {"rf", "if_xt"}));
    addMap(makeMap(
        "gamma_R_Zb", spaces.at("Zb"), spaces.at("Phat0sq"),
        {{"of", {{"rf", 1}, {"ffb", 1}}},
         {"ff", {{"ff0", 1}, {"ef_xt", 1}}},
         {"if_eta", {{"if_eta", 1}, {"ef_x", 1}}},
         {"if_x", {{"if_xt", 1}}}},
        {"lf", "if_x"}));
    addMap(makeMap(
        "gamma_L_Z", spaces.at("Z"), spaces.at("Phat0sq"),
        {{"of", {{"lf", 1}}},
         {"ff", {{"ff0", 1}, {"ef_x", 1}}},
         {"if_eta", {{"if_eta", 1}, {"ef_xt", 1}}},
         {"if_x", {{"if_x", 1}}}},
        {"rf", "if_xt"}));
    addMap(makeMap(
        "gamma_R_Z", spaces.at("Z"), spaces.at("Phat0sq"),
        {{"of", {{"rf", 1}}},
         {"ff", {{"ff0", 1}, {"ef_xt", 1}}},
         {"if_eta", {{"if_eta", 1}, {"ef_x", 1}}},
         {"if_x", {{"if_xt", 1}}}},
        {"lf", "if_x"}));

    // Density re-bundling tables, transcribed from the proofs that use them.
    densityShifts["thm:global-composition-0b-0b"] = {{"H010", 1}, {"ff_LRb", 1}};
    densityShifts["thm:compose-trace-poisson"] = {{"of", 1}, {"ff", 2}};
    densityShifts["thm:mapping-phg-0b-interior"] = {{"rf", 1}, {"ffb", 1}};
  }
};

const Registry& registry() {
  static const Registry r;
  return r;
}

}  // namespace

const ModelSpace& registrySpace(const std::string& name) {
  auto it = registry().spaces.find(name);
  if (it == registry().spaces.end()) throw Error("unknown model space '" + name + "'");
  return it->second;
}

const BMap& registryBMap(const std::string& name) {
  auto it = registry().maps.find(name);
  if (it == registry().maps.end()) throw Error("unknown b-map '" + name + "'");
  return it->second;
}

std::vector<std::string> registryBMapNames() {
  std::vector<std::string> out;
  for (const auto& [n, m] : registry().maps) out.push_back(n);
  return out;
}

std::vector<std::string> registrySpaceNames() {
  std::vector<std::string> out;
  for (const auto& [n, s] : registry().spaces) out.push_back(n);
  return out;
}

const std::map<std::string, int>& registryDensityShift(const std::string& ruleId) {
  auto it = registry().densityShifts.find(ruleId);
  if (it == registry().densityShifts.end())
    throw Error("unknown density-shift rule '" + ruleId + "'");
  return it->second;
}

std::vector<std::string> registryDensityShiftIds() {
  std::vector<std::string> out;
  for (const auto& [n, s] : registry().densityShifts) out.push_back(n);
  return out;
}

bool densityShiftCheck(const std::string& ruleId,
                       const std::map<std::string, int>& declared) {
  return registryDensityShift(ruleId) == declared;
}

}  // namespace phg
