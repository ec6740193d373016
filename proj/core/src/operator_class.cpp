#include "phg/operator_class.hpp"

#include <algorithm>

namespace phg {

std::string kindName(Kind k) {
  switch (k) {
    case Kind::VeryResidual: return "VeryResidual";
    case Kind::ResidualTrace: return "ResidualTrace";
    case Kind::ResidualPoisson: return "ResidualPoisson";
    case Kind::BCalc: return "BCalc";
    case Kind::ZeroCalc: return "ZeroCalc";
    case Kind::ExtZeroCalc: return "ExtZeroCalc";
    case Kind::ZeroInterior: return "ZeroInterior";
    case Kind::ZeroBInterior: return "ZeroBInterior";
    case Kind::ZeroTrace: return "ZeroTrace";
    case Kind::ZeroPoisson: return "ZeroPoisson";
    case Kind::Boundary: return "Boundary";
    case Kind::TwistedZeroTrace: return "TwistedZeroTrace";
    case Kind::TwistedZeroPoisson: return "TwistedZeroPoisson";
    case Kind::TwistedBoundary: return "TwistedBoundary";
  }
  return "?";
}

std::optional<Kind> kindFromName(const std::string& name) {
  static const Kind all[] = {
      Kind::VeryResidual,   Kind::ResidualTrace,     Kind::ResidualPoisson,
      Kind::BCalc,          Kind::ZeroCalc,          Kind::ExtZeroCalc,
      Kind::ZeroInterior,   Kind::ZeroBInterior,     Kind::ZeroTrace,
      Kind::ZeroPoisson,    Kind::Boundary,          Kind::TwistedZeroTrace,
      Kind::TwistedZeroPoisson, Kind::TwistedBoundary};
  for (Kind k : all)
    if (kindName(k) == name) return k;
  return std::nullopt;
}

const std::vector<std::string>& kindFaces(Kind k) {
  static const std::vector<std::string> lfrf = {"lf", "rf"};
  static const std::vector<std::string> of = {"of"};
  static const std::vector<std::string> lfrfffb = {"lf", "rf", "ffb"};
  static const std::vector<std::string> lfrfff0 = {"lf", "rf", "ff0"};
  static const std::vector<std::string> four = {"lf", "rf", "ffb", "ff0"};
  static const std::vector<std::string> offf = {"of", "ff"};
  static const std::vector<std::string> setOnly = {"set"};
  switch (k) {
    case Kind::VeryResidual: return lfrf;
    case Kind::ResidualTrace:
    case Kind::ResidualPoisson: return of;
    case Kind::BCalc: return lfrfffb;
    case Kind::ZeroCalc:
    case Kind::ZeroInterior: return lfrfff0;
    case Kind::ExtZeroCalc:
    case Kind::ZeroBInterior: return four;
    case Kind::ZeroTrace:
    case Kind::ZeroPoisson:
    case Kind::TwistedZeroTrace:
    case Kind::TwistedZeroPoisson: return offf;
    case Kind::Boundary:
    case Kind::TwistedBoundary: return setOnly;
  }
  return setOnly;
}

bool kindIsTwisted(Kind k) {
  return k == Kind::TwistedZeroTrace || k == Kind::TwistedZeroPoisson ||
         k == Kind::TwistedBoundary;
}

int Twist::dim() const {
  int d = 0;
  for (const auto& b : blocks) d += b.size;
  return d;
}

Twist Twist::negAdjoint() const {
  Twist t = *this;
  for (auto& b : t.blocks) b.mu = -b.mu.conj();
  return t;
}

std::string Twist::str() const {
  std::string s = "[";
  for (size_t i = 0; i < blocks.size(); ++i) {
    if (i) s += ",";
    s += "(" + blocks[i].mu.str() + "," + std::to_string(blocks[i].size) + ")";
  }
  return s + "]";
}

OperatorClass OperatorClass::make(Kind kind, int n,
                                  std::map<std::string, IndexSet> sets,
                                  std::optional<int> interiorOrder) {
  if (kindIsTwisted(kind))
    throw Error("use makeTwisted/makeTwistedBoundary for twisted kinds");
  OperatorClass c;
  c.kind_ = kind;
  c.n_ = n;
  const auto& faces = kindFaces(kind);
  for (const auto& f : faces)
    if (!sets.count(f))
      throw Error(kindName(kind) + " needs face '" + f + "'");
  if (sets.size() != faces.size())
    throw Error(kindName(kind) + " takes exactly the faces " +
                std::to_string(faces.size()));
  c.sets_ = std::move(sets);
  if (interiorOrder && kind != Kind::ZeroCalc)
    throw Error("only ZeroCalc carries an interior order");
  c.interiorOrder_ = interiorOrder;
  return c;
}

OperatorClass OperatorClass::makeTwisted(Kind kind, int n, IndexSet ofSet,
                                         std::vector<Generator> leading,
                                         Twist twist) {
  if (kind != Kind::TwistedZeroTrace && kind != Kind::TwistedZeroPoisson)
    throw Error("makeTwisted handles twisted trace/Poisson kinds");
  if (twist.blocks.empty()) throw Error("twist needs at least one block");
  OperatorClass c;
  c.kind_ = kind;
  c.n_ = n;
  c.sets_["of"] = std::move(ofSet);
  c.sets_["ff"] = IndexSet::fromGenerators(std::move(leading));
  c.leadingOnly_.insert("ff");
  c.twistDom_ = std::move(twist);
  return c;
}

OperatorClass OperatorClass::makeTwistedBoundary(int n,
                                                 std::vector<Generator> leading,
                                                 Twist dom, Twist cod) {
  if (dom.blocks.empty() || cod.blocks.empty())
    throw Error("twist needs at least one block");
  OperatorClass c;
  c.kind_ = Kind::TwistedBoundary;
  c.n_ = n;
  c.sets_["set"] = IndexSet::fromGenerators(std::move(leading));
  c.leadingOnly_.insert("set");
  c.twistDom_ = std::move(dom);
  c.twistCod_ = std::move(cod);
  return c;
}

const IndexSet& OperatorClass::at(const std::string& face) const {
  auto it = sets_.find(face);
  if (it == sets_.end())
    throw Error(kindName(kind_) + " has no face '" + face + "'");
  if (leadingOnly_.count(face) && !kindIsTwisted(kind_))
    throw Error("face '" + face + "' of this " + kindName(kind_) +
                " is known to leading order only");
  return it->second;
}

std::vector<Generator> OperatorClass::leading(const std::string& face) const {
  auto it = sets_.find(face);
  if (it == sets_.end())
    throw Error(kindName(kind_) + " has no face '" + face + "'");
  if (it->second.isInf()) return {};
  return it->second.leadingSet();
}

bool OperatorClass::isLeadingOnly(const std::string& face) const {
  return leadingOnly_.count(face) > 0;
}

const std::vector<std::string>& OperatorClass::faces() const {
  return kindFaces(kind_);
}

bool OperatorClass::operator==(const OperatorClass& o) const {
  return kind_ == o.kind_ && n_ == o.n_ && sets_ == o.sets_ &&
         leadingOnly_ == o.leadingOnly_ && interiorOrder_ == o.interiorOrder_ &&
         twistDom_ == o.twistDom_ && twistCod_ == o.twistCod_;
}

std::string OperatorClass::str() const {
  std::string s = kindName(kind_) + "(";
  bool first = true;
  for (const auto& f : faces()) {
    if (!first) s += ", ";
    first = false;
    if (leadingOnly_.count(f))
      s += "[" + f + "]=" + sets_.at(f).str();
    else
      s += f + "=" + sets_.at(f).str();
  }
  if (kind_ == Kind::ZeroCalc) {
    s += ", m=";
    s += interiorOrder_ ? std::to_string(*interiorOrder_) : "-inf";
  }
  if (twistDom_ && twistCod_)
    s += ", dom=" + twistDom_->str() + ", cod=" + twistCod_->str();
  else if (twistDom_)
    s += ", twist=" + twistDom_->str();
  s += ", n=" + std::to_string(n_) + ")";
  return s;
}

OperatorClassBuilder& OperatorClassBuilder::set(const std::string& face, IndexSet e) {
  c_.sets_[face] = std::move(e);
  return *this;
}

OperatorClassBuilder& OperatorClassBuilder::leadingOnly(const std::string& face) {
  c_.leadingOnly_.insert(face);
  return *this;
}

OperatorClassBuilder& OperatorClassBuilder::interiorOrder(std::optional<int> m) {
  c_.interiorOrder_ = m;
  return *this;
}

OperatorClassBuilder& OperatorClassBuilder::twists(std::optional<Twist> dom,
                                                   std::optional<Twist> cod) {
  c_.twistDom_ = std::move(dom);
  c_.twistCod_ = std::move(cod);
  return *this;
}

OperatorClass OperatorClassBuilder::finish() {
  for (const auto& f : kindFaces(c_.kind_))
    if (!c_.sets_.count(f))
      throw Error("builder misses face '" + f + "' for " + kindName(c_.kind_));
  return c_;
}

}  // namespace phg
