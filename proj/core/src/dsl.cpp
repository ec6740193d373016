#include "phg/dsl.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "phg/bessel.hpp"
#include "phg/ledger.hpp"
#include "phg/rules.hpp"

namespace phg {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail(SourcePos pos, std::string msg) {
  throw DslError(Diagnostic{pos, std::move(msg)});
}

// ---- lexer ----------------------------------------------------------------

enum class Tok { Ident, Number, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourcePos pos;
};

class Lexer {
public:
  explicit Lexer(const std::string& text) : s_(text) { next(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    next();
    return t;
  }

private:
  void next() {
    for (;;) {
      while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t' ||
                                s_[i_] == '\r' || s_[i_] == '\n'))
        advance();
      if (i_ < s_.size() && s_[i_] == '#') {
        while (i_ < s_.size() && s_[i_] != '\n') advance();
        continue;
      }
      break;
    }
    tok_.pos = pos_;
    if (i_ >= s_.size()) {
      tok_ = Token{Tok::End, "", pos_};
      return;
    }
    char c = s_[i_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string t;
      while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) ||
                                s_[i_] == '_')) {
        t += s_[i_];
        advance();
      }
      tok_ = Token{Tok::Ident, std::move(t), tok_.pos};
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string t;
      auto digits = [&] {
        while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) {
          t += s_[i_];
          advance();
        }
      };
      digits();
      if (i_ < s_.size() && s_[i_] == '.') {
        t += '.';
        advance();
        digits();
      }
      if (i_ < s_.size() && (s_[i_] == 'e' || s_[i_] == 'E')) {
        std::size_t save = i_;
        SourcePos savePos = pos_;
        std::string e(1, s_[i_]);
        advance();
        if (i_ < s_.size() && (s_[i_] == '+' || s_[i_] == '-')) {
          e += s_[i_];
          advance();
        }
        if (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) {
          t += e;
          digits();
        } else {
          i_ = save;
          pos_ = savePos;
        }
      }
      if (t.size() > 5000) fail(tok_.pos, "numeric literal too long");
      tok_ = Token{Tok::Number, std::move(t), tok_.pos};
      return;
    }
    if (std::string("{}()[],+-=:/").find(c) != std::string::npos) {
      advance();
      tok_ = Token{Tok::Punct, std::string(1, c), tok_.pos};
      return;
    }
    fail(pos_, std::string("unexpected character '") + c + "'");
  }

  void advance() {
    if (s_[i_] == '\n') {
      ++pos_.line;
      pos_.col = 1;
    } else {
      ++pos_.col;
    }
    ++i_;
  }

  const std::string& s_;
  std::size_t i_ = 0;
  SourcePos pos_;
  Token tok_;
};

// ---- parser ---------------------------------------------------------------

struct KindInfo {
  Kind kind;
  std::vector<std::string> keys;  // admissible argument keys
  std::vector<std::string> required;
};

const std::vector<std::pair<std::string, KindInfo>>& classKeywords() {
  static const std::vector<std::pair<std::string, KindInfo>> table = {
      {"veryresidual", {Kind::VeryResidual, {"lf", "rf", "n"}, {"lf", "rf"}}},
      {"residualtrace", {Kind::ResidualTrace, {"of", "n"}, {"of"}}},
      {"residualpoisson", {Kind::ResidualPoisson, {"of", "n"}, {"of"}}},
      {"bcalc", {Kind::BCalc, {"lf", "rf", "ffb", "n"}, {"lf", "rf", "ffb"}}},
      {"zerocalc",
       {Kind::ZeroCalc, {"lf", "rf", "ff0", "m", "n"}, {"lf", "rf", "ff0"}}},
      {"extzerocalc",
       {Kind::ExtZeroCalc, {"lf", "rf", "ffb", "ff0", "n"},
        {"lf", "rf", "ffb", "ff0"}}},
      {"zerointerior",
       {Kind::ZeroInterior, {"lf", "rf", "ff0", "n"}, {"lf", "rf", "ff0"}}},
      {"zerobinterior",
       {Kind::ZeroBInterior, {"lf", "rf", "ffb", "ff0", "n"},
        {"lf", "rf", "ffb", "ff0"}}},
      {"trace", {Kind::ZeroTrace, {"of", "ff", "n"}, {"of", "ff"}}},
      {"poisson", {Kind::ZeroPoisson, {"of", "ff", "n"}, {"of", "ff"}}},
      {"boundary", {Kind::Boundary, {"set", "n"}, {"set"}}},
      {"ttrace",
       {Kind::TwistedZeroTrace, {"of", "ff", "twist", "n"}, {"of", "ff", "twist"}}},
      {"tpoisson",
       {Kind::TwistedZeroPoisson, {"of", "ff", "twist", "n"},
        {"of", "ff", "twist"}}},
      {"tboundary",
       {Kind::TwistedBoundary, {"set", "dom", "cod", "n"}, {"set", "dom", "cod"}}},
  };
  return table;
}

const KindInfo* lookupClassKeyword(const std::string& kw) {
  for (const auto& [name, info] : classKeywords())
    if (name == kw) return &info;
  return nullptr;
}

class Parser {
public:
  explicit Parser(const std::string& text) : lx_(text) {}

  Script parse() {
    Script sc;
    while (lx_.peek().kind != Tok::End) sc.stmts.push_back(statement());
    return sc;
  }

private:
  Token expectPunct(const std::string& p) {
    Token t = lx_.take();
    if (t.kind != Tok::Punct || t.text != p)
      fail(t.pos, "expected '" + p + "', got '" + shown(t) + "'");
    return t;
  }
  Token expectIdent(const std::string& what) {
    Token t = lx_.take();
    if (t.kind != Tok::Ident)
      fail(t.pos, "expected " + what + ", got '" + shown(t) + "'");
    return t;
  }
  void expectKeyword(const std::string& kw) {
    Token t = lx_.take();
    if (t.kind != Tok::Ident || t.text != kw)
      fail(t.pos, "expected '" + kw + "', got '" + shown(t) + "'");
  }
  bool atPunct(const std::string& p) const {
    return lx_.peek().kind == Tok::Punct && lx_.peek().text == p;
  }
  bool atIdent(const std::string& w) const {
    return lx_.peek().kind == Tok::Ident && lx_.peek().text == w;
  }
  static std::string shown(const Token& t) {
    return t.kind == Tok::End ? "end of input" : t.text;
  }

  // -- numbers --

  BigInt integer(const std::string& text, SourcePos pos) {
    for (char c : text)
      if (!std::isdigit(static_cast<unsigned char>(c)))
        fail(pos, "expected an integer, got '" + text + "'");
    return BigInt(text);
  }

  Rat rational() {
    bool neg = false;
    if (atPunct("-")) {
      lx_.take();
      neg = true;
    }
    Token t = lx_.take();
    if (t.kind != Tok::Number)
      fail(t.pos, "expected a rational, got '" + shown(t) + "'");
    BigInt num = integer(t.text, t.pos);
    BigInt den = 1;
    if (atPunct("/")) {
      lx_.take();
      Token d = lx_.take();
      if (d.kind != Tok::Number)
        fail(d.pos, "expected a denominator, got '" + shown(d) + "'");
      den = integer(d.text, d.pos);
      if (den == 0) fail(d.pos, "zero denominator");
    }
    Rat r(num, den);
    return neg ? Rat(-r) : r;
  }

  int smallNat(const std::string& what, int maxVal = 1000000) {
    Token t = lx_.take();
    if (t.kind != Tok::Number)
      fail(t.pos, "expected " + what + ", got '" + shown(t) + "'");
    BigInt v = integer(t.text, t.pos);
    if (v > maxVal) fail(t.pos, what + " too large");
    return static_cast<int>(v);
  }

  int smallInt(const std::string& what) {
    bool neg = false;
    if (atPunct("-")) {
      lx_.take();
      neg = true;
    }
    int v = smallNat(what);
    return neg ? -v : v;
  }

  // rational with an optional signed imaginary part "a", "a+bi", "a-bi"
  ComplexExact complexExact() {
    Rat re = rational();
    Rat im = 0;
    if (atPunct("+") || atPunct("-")) {
      // an imaginary tail must close with the marker `i`; in index-set
      // positions no other continuation is possible
      bool neg = lx_.take().text == "-";
      Token t = lx_.take();
      if (t.kind != Tok::Number)
        fail(t.pos, "expected the imaginary part, got '" + shown(t) + "'");
      BigInt num = integer(t.text, t.pos);
      BigInt den = 1;
      if (atPunct("/")) {
        lx_.take();
        Token d = lx_.take();
        if (d.kind != Tok::Number)
          fail(d.pos, "expected a denominator, got '" + shown(d) + "'");
        den = integer(d.text, d.pos);
        if (den == 0) fail(d.pos, "zero denominator");
      }
      expectKeyword("i");
      im = Rat(num, den);
      if (neg) im = -im;
    }
    return ComplexExact(std::move(re), std::move(im));
  }

  double floating() {
    bool neg = false;
    if (atPunct("-")) {
      lx_.take();
      neg = true;
    }
    Token t = lx_.take();
    if (t.kind != Tok::Number)
      fail(t.pos, "expected a number, got '" + shown(t) + "'");
    double v = std::strtod(t.text.c_str(), nullptr);
    return neg ? -v : v;
  }

  // -- index-set expressions --

  Generator pair() {
    expectPunct("(");
    ComplexExact a = complexExact();
    expectPunct(",");
    int l = smallNat("a log order");
    expectPunct(")");
    return Generator(std::move(a), l);
  }

  Expr expr(int depth = 0) {
    Expr first = term(depth);
    if (!atPunct("+")) return first;
    Expr sum;
    sum.tag = Expr::Tag::Sum;
    sum.pos = first.pos;
    sum.args.push_back(std::move(first));
    while (atPunct("+")) {
      lx_.take();
      sum.args.push_back(term(depth));
    }
    return sum;
  }

  Expr term(int depth) {
    if (depth > 100) fail(lx_.peek().pos, "expression nested too deeply");
    Expr e;
    e.pos = lx_.peek().pos;
    if (atPunct("{")) {
      lx_.take();
      std::vector<Generator> gens;
      gens.push_back(pair());
      while (atPunct(",")) {
        lx_.take();
        gens.push_back(pair());
      }
      expectPunct("}");
      e.tag = Expr::Tag::Literal;
      e.literal = IndexSet::fromGenerators(std::move(gens));
      return e;
    }
    Token t = expectIdent("an index-set expression");
    if (t.text == "INF") {
      e.tag = Expr::Tag::Literal;
      e.literal = IndexSet::inf();
      return e;
    }
    if (t.text == "EU") {
      e.tag = Expr::Tag::EU;
      expectPunct("(");
      e.args.push_back(expr(depth + 1));
      expectPunct(",");
      e.args.push_back(expr(depth + 1));
      while (atPunct(",")) {
        lx_.take();
        e.args.push_back(expr(depth + 1));
      }
      expectPunct(")");
      return e;
    }
    if (t.text == "shift") {
      e.tag = Expr::Tag::Shift;
      expectPunct("(");
      e.args.push_back(expr(depth + 1));
      expectPunct(",");
      e.scalar = complexExact();
      expectPunct(")");
      return e;
    }
    if (t.text == "conj" || t.text == "lead") {
      e.tag = t.text == "conj" ? Expr::Tag::Conj : Expr::Tag::Lead;
      expectPunct("(");
      e.args.push_back(expr(depth + 1));
      expectPunct(")");
      return e;
    }
    if (t.text == "trunc") {
      e.tag = Expr::Tag::Trunc;
      expectPunct("(");
      e.args.push_back(expr(depth + 1));
      expectPunct(",");
      e.cut = rational();
      expectPunct(")");
      return e;
    }
    e.tag = Expr::Tag::Name;
    e.name = t.text;
    return e;
  }

  // -- twists --

  Twist twistLiteral() {
    expectPunct("[");
    Twist tw;
    auto one = [&] {
      expectPunct("(");
      ComplexExact mu = complexExact();
      expectPunct(",");
      int size = smallNat("a block size");
      if (size < 1) fail(lx_.peek().pos, "block size must be positive");
      expectPunct(")");
      tw.blocks.push_back(TwistBlock{std::move(mu), size});
    };
    one();
    while (atPunct(",")) {
      lx_.take();
      one();
    }
    expectPunct("]");
    return tw;
  }

  // -- declarations --

  ClassDecl classDecl(const std::string& kw, const KindInfo& info, SourcePos pos) {
    ClassDecl d;
    d.keyword = kw;
    d.kind = info.kind;
    d.pos = pos;
    expectPunct("(");
    auto arg = [&] {
      Token key = expectIdent("an argument name");
      if (std::find(info.keys.begin(), info.keys.end(), key.text) ==
          info.keys.end())
        fail(key.pos, "'" + kw + "' takes no argument '" + key.text + "'");
      for (const auto& a : d.args)
        if (a.key == key.text) fail(key.pos, "duplicate argument '" + key.text + "'");
      expectPunct("=");
      ClassArg a;
      a.key = key.text;
      a.pos = key.pos;
      if (a.key == "twist" || a.key == "dom" || a.key == "cod")
        a.value = twistLiteral();
      else if (a.key == "m" || a.key == "n")
        a.value = smallInt(a.key == "m" ? "the interior order" : "the dimension");
      else
        a.value = expr();
      d.args.push_back(std::move(a));
    };
    arg();
    while (atPunct(",")) {
      lx_.take();
      arg();
    }
    expectPunct(")");
    for (const auto& req : info.required) {
      bool found = false;
      for (const auto& a : d.args) found = found || a.key == req;
      if (!found) fail(pos, "'" + kw + "' needs the argument '" + req + "'");
    }
    return d;
  }

  OpDecl opDecl(SourcePos pos) {
    OpDecl d;
    d.pos = pos;
    expectKeyword("m");
    expectPunct("=");
    d.m = smallNat("the operator order", 16);
    if (d.m < 1) fail(pos, "the operator order must be positive");
    expectPunct("{");
    auto coef = [&] {
      expectPunct("(");
      int j = smallNat("a derivative order", 16);
      expectPunct(",");
      std::vector<int> alpha;
      if (atPunct("(")) {
        lx_.take();
        alpha.push_back(smallNat("a multi-index entry", 16));
        while (atPunct(",")) {
          lx_.take();
          alpha.push_back(smallNat("a multi-index entry", 16));
        }
        expectPunct(")");
      } else {
        alpha.push_back(smallNat("a multi-index entry", 16));
      }
      expectPunct(")");
      expectPunct(":");
      double c = floating();
      d.coeffs.emplace_back(std::make_pair(j, std::move(alpha)), c);
    };
    coef();
    while (atPunct(",")) {
      lx_.take();
      coef();
    }
    expectPunct("}");
    expectKeyword("eta");
    expectPunct("=");
    expectPunct("[");
    d.eta.push_back(floating());
    while (atPunct(",")) {
      lx_.take();
      d.eta.push_back(floating());
    }
    expectPunct("]");
    if (d.eta.size() > 16) fail(pos, "too many eta components");
    return d;
  }

  // -- statements --

  Stmt statement() {
    Token t = expectIdent("a statement");
    if (t.text == "let") {
      LetStmt let;
      Token name = expectIdent("a binding name");
      if (lookupClassKeyword(name.text) || name.text == "let" ||
          name.text == "op" || name.text == "INF" || name.text == "EU" ||
          name.text == "i")
        fail(name.pos, "'" + name.text + "' is reserved");
      let.name = name.text;
      let.pos = t.pos;
      expectPunct("=");
      if (atIdent("op")) {
        Token op = lx_.take();
        let.rhs = opDecl(op.pos);
      } else if (lx_.peek().kind == Tok::Ident &&
                 lookupClassKeyword(lx_.peek().text)) {
        Token kw = lx_.take();
        let.rhs = classDecl(kw.text, *lookupClassKeyword(kw.text), kw.pos);
      } else {
        let.rhs = expr();
      }
      return Stmt{std::move(let)};
    }
    Command c;
    c.pos = t.pos;
    if (t.text == "print") {
      c.op = Command::Op::Print;
      c.expr = expr();
    } else if (t.text == "compose") {
      c.op = Command::Op::Compose;
      c.names.push_back(expectIdent("a class name").text);
      c.names.push_back(expectIdent("a class name").text);
    } else if (t.text == "adjoint") {
      c.op = Command::Op::Adjoint;
      c.names.push_back(expectIdent("a class name").text);
      expectKeyword("delta");
      expectPunct("=");
      c.delta = rational();
    } else if (t.text == "include") {
      c.op = Command::Op::Include;
      c.names.push_back(expectIdent("a class name").text);
      Token k = expectIdent("a target kind");
      if (!kindFromName(k.text)) fail(k.pos, "unknown kind '" + k.text + "'");
      c.word = k.text;
    } else if (t.text == "fourier") {
      c.op = Command::Op::Fourier;
      Token dir = expectIdent("a direction");
      if (dir.text != "tophysical" && dir.text != "tosymbolic")
        fail(dir.pos, "expected 'tophysical' or 'tosymbolic'");
      c.word = dir.text;
      c.names.push_back(expectIdent("a class name").text);
    } else if (t.text == "verdict") {
      c.op = Command::Op::Verdict;
      c.names.push_back(expectIdent("a class name").text);
      expectKeyword("delta");
      expectPunct("=");
      c.delta = rational();
      Token q = expectIdent("a question");
      if (q.text != "phg" && q.text != "bounded" && q.text != "compact")
        fail(q.pos, "expected 'phg', 'bounded', or 'compact'");
      c.word = q.text;
      if (atIdent("input")) {
        lx_.take();
        expectPunct("=");
        c.expr = expr();
      }
    } else if (t.text == "degree") {
      c.op = Command::Op::Degree;
      c.names.push_back(expectIdent("a class name").text);
    } else if (t.text == "kernel") {
      c.op = Command::Op::Kernel;
      c.names.push_back(expectIdent("an operator name").text);
      expectKeyword("delta");
      expectPunct("=");
      c.fdelta = floating();
    } else if (t.text == "ledger") {
      c.op = Command::Op::Ledger;
      expectKeyword("roots");
      expectPunct("=");
      expectPunct("[");
      auto root = [&] {
        expectPunct("(");
        ComplexExact mu = complexExact();
        expectPunct(",");
        int mult = smallNat("a multiplicity", 64);
        expectPunct(")");
        c.roots.emplace_back(std::move(mu), mult);
      };
      root();
      while (atPunct(",")) {
        lx_.take();
        root();
      }
      expectPunct("]");
      expectKeyword("delta");
      expectPunct("=");
      c.delta = rational();
      expectKeyword("deltabar");
      expectPunct("=");
      c.deltaBar = rational();
      expectKeyword("m");
      expectPunct("=");
      c.m = smallNat("the interior order", 16);
      expectKeyword("n");
      expectPunct("=");
      c.n = smallNat("the dimension", 64);
      c.names.push_back(expectIdent("a boundary operator name").text);
    } else {
      fail(t.pos, "unknown statement '" + t.text + "'");
    }
    return Stmt{std::move(c)};
  }

  Lexer lx_;
};

// ---- formatting -----------------------------------------------------------

std::string fmtFloat(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

std::string fmtTwist(const Twist& t) { return t.str(); }

std::string fmtClassDecl(const ClassDecl& d) {
  std::string s = d.keyword + "(";
  for (std::size_t i = 0; i < d.args.size(); ++i) {
    if (i) s += ", ";
    s += d.args[i].key + "=";
    const auto& v = d.args[i].value;
    if (std::holds_alternative<Expr>(v))
      s += formatExpr(std::get<Expr>(v));
    else if (std::holds_alternative<Twist>(v))
      s += fmtTwist(std::get<Twist>(v));
    else
      s += std::to_string(std::get<int>(v));
  }
  return s + ")";
}

std::string fmtOpDecl(const OpDecl& d) {
  std::string s = "op m=" + std::to_string(d.m) + " { ";
  for (std::size_t i = 0; i < d.coeffs.size(); ++i) {
    if (i) s += ", ";
    const auto& [key, c] = d.coeffs[i];
    s += "(" + std::to_string(key.first) + ",";
    if (key.second.size() == 1) {
      s += std::to_string(key.second[0]);
    } else {
      s += "(";
      for (std::size_t k = 0; k < key.second.size(); ++k) {
        if (k) s += ",";
        s += std::to_string(key.second[k]);
      }
      s += ")";
    }
    s += "): " + fmtFloat(c);
  }
  s += " } eta=[";
  for (std::size_t i = 0; i < d.eta.size(); ++i) {
    if (i) s += ",";
    s += fmtFloat(d.eta[i]);
  }
  return s + "]";
}

std::string fmtCommand(const Command& c) {
  switch (c.op) {
    case Command::Op::Print:
      return "print " + formatExpr(*c.expr);
    case Command::Op::Compose:
      return "compose " + c.names[0] + " " + c.names[1];
    case Command::Op::Adjoint:
      return "adjoint " + c.names[0] + " delta=" + ratToString(c.delta);
    case Command::Op::Include:
      return "include " + c.names[0] + " " + c.word;
    case Command::Op::Fourier:
      return "fourier " + c.word + " " + c.names[0];
    case Command::Op::Verdict: {
      std::string s = "verdict " + c.names[0] + " delta=" + ratToString(c.delta) +
                      " " + c.word;
      if (c.expr) s += " input=" + formatExpr(*c.expr);
      return s;
    }
    case Command::Op::Degree:
      return "degree " + c.names[0];
    case Command::Op::Kernel:
      return "kernel " + c.names[0] + " delta=" + fmtFloat(c.fdelta);
    case Command::Op::Ledger: {
      std::string s = "ledger roots=[";
      for (std::size_t i = 0; i < c.roots.size(); ++i) {
        if (i) s += ",";
        s += "(" + c.roots[i].first.str() + "," +
             std::to_string(c.roots[i].second) + ")";
      }
      s += "] delta=" + ratToString(c.delta) +
           " deltabar=" + ratToString(c.deltaBar) + " m=" + std::to_string(c.m) +
           " n=" + std::to_string(c.n) + " " + c.names[0];
      return s;
    }
  }
  return "";
}

// ---- evaluation -----------------------------------------------------------

struct OpValue {
  BesselSpec spec;
  OpDecl decl;
};

using Value = std::variant<IndexSet, OperatorClass, OpValue>;

struct Env {
  std::vector<std::pair<std::string, Value>> bindings;

  const Value* find(const std::string& name) const {
    for (const auto& [k, v] : bindings)
      if (k == name) return &v;
    return nullptr;
  }
};

IndexSet evalExpr(const Expr& e, const Env& env) {
  switch (e.tag) {
    case Expr::Tag::Literal:
      return e.literal;
    case Expr::Tag::Name: {
      const Value* v = env.find(e.name);
      if (!v) fail(e.pos, "'" + e.name + "' is not bound");
      if (!std::holds_alternative<IndexSet>(*v))
        fail(e.pos, "'" + e.name + "' is not an index set");
      return std::get<IndexSet>(*v);
    }
    case Expr::Tag::EU: {
      std::vector<IndexSet> ops;
      for (const auto& a : e.args) ops.push_back(evalExpr(a, env));
      return extendedUnion(ops);
    }
    case Expr::Tag::Sum: {
      IndexSet acc = evalExpr(e.args[0], env);
      for (std::size_t i = 1; i < e.args.size(); ++i)
        acc = acc.sum(evalExpr(e.args[i], env));
      return acc;
    }
    case Expr::Tag::Shift:
      return evalExpr(e.args[0], env).shift(e.scalar);
    case Expr::Tag::Conj:
      return evalExpr(e.args[0], env).conjugate();
    case Expr::Tag::Trunc:
      return evalExpr(e.args[0], env).truncateAbove(e.cut);
    case Expr::Tag::Lead: {
      IndexSet s = evalExpr(e.args[0], env);
      if (s.isInf()) fail(e.pos, "lead(INF) is undefined");
      return IndexSet::fromGenerators(s.leadingSet());
    }
  }
  fail(e.pos, "unreachable expression tag");
}

OperatorClass evalClassDecl(const ClassDecl& d, const Env& env) {
  int n = 1;
  std::optional<int> order;
  std::map<std::string, IndexSet> sets;
  std::optional<Twist> twist, dom, cod;
  for (const auto& a : d.args) {
    if (a.key == "n") {
      n = std::get<int>(a.value);
      if (n < 1) fail(a.pos, "the dimension must be positive");
    } else if (a.key == "m") {
      order = std::get<int>(a.value);
    } else if (a.key == "twist") {
      twist = std::get<Twist>(a.value);
    } else if (a.key == "dom") {
      dom = std::get<Twist>(a.value);
    } else if (a.key == "cod") {
      cod = std::get<Twist>(a.value);
    } else {
      sets[a.key] = evalExpr(std::get<Expr>(a.value), env);
    }
  }
  try {
    if (d.kind == Kind::TwistedZeroTrace || d.kind == Kind::TwistedZeroPoisson) {
      const IndexSet& ff = sets.at("ff");
      if (ff.isInf()) fail(d.pos, "the leading front-face set cannot be INF");
      return OperatorClass::makeTwisted(d.kind, n, sets.at("of"),
                                        ff.generators(), *twist);
    }
    if (d.kind == Kind::TwistedBoundary) {
      const IndexSet& set = sets.at("set");
      if (set.isInf()) fail(d.pos, "the leading set cannot be INF");
      return OperatorClass::makeTwistedBoundary(n, set.generators(), *dom, *cod);
    }
    return OperatorClass::make(d.kind, n, std::move(sets), order);
  } catch (const Error& e) {
    if (dynamic_cast<const DslError*>(&e)) throw;
    fail(d.pos, e.what());
  }
}

OpValue evalOpDecl(const OpDecl& d) {
  OpValue v;
  v.decl = d;
  v.spec.m = d.m;
  v.spec.eta = d.eta;
  for (const auto& [key, c] : d.coeffs) {
    auto [j, alpha] = key;
    if (alpha.size() == 1 && alpha[0] == 0)
      alpha.assign(d.eta.size(), 0);  // bare 0 means the zero multi-index
    if (alpha.size() != d.eta.size())
      fail(d.pos, "multi-index length does not match eta");
    if (j > d.m) fail(d.pos, "derivative order exceeds the operator order");
    v.spec.coeffs[{j, alpha}] += Cx(c);
  }
  return v;
}

// ---- command execution ----------------------------------------------------

std::string fmtSig(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

struct Runner {
  const RunOptions& opt;
  Env env;
  std::vector<std::string> lines;
  Json jcmds = Json::array();

  explicit Runner(const RunOptions& o) : opt(o) {}

  const OperatorClass& classOf(const std::string& name, SourcePos pos) {
    const Value* v = env.find(name);
    if (!v) fail(pos, "'" + name + "' is not bound");
    if (!std::holds_alternative<OperatorClass>(*v))
      fail(pos, "'" + name + "' is not an operator class");
    return std::get<OperatorClass>(*v);
  }

  const OpValue& opOf(const std::string& name, SourcePos pos) {
    const Value* v = env.find(name);
    if (!v) fail(pos, "'" + name + "' is not bound");
    if (!std::holds_alternative<OpValue>(*v))
      fail(pos, "'" + name + "' is not a Bessel operator spec");
    return std::get<OpValue>(*v);
  }

  void emitVerdict(const std::string& head, const Verdict& v) {
    std::string status = v.status == Verdict::Status::Ok      ? "OK"
                         : v.status == Verdict::Status::Fails ? "FAIL"
                                                              : "NORULE";
    std::string tag = v.ruleId.empty() ? "" : " [" + v.ruleId + "]";
    std::string line = head + ": " + status;
    if (v.result) line += " " + v.result->str();
    line += tag;
    lines.push_back(line);
    for (const auto& c : v.conditions) lines.push_back("  " + c + tag);
    for (const auto& nte : v.notes) lines.push_back("  note: " + nte);
    if (opt.json) {
      Json j;
      j["command"] = head;
      j["status"] = status;
      j["rule"] = v.ruleId;
      j["result"] = v.result ? v.result->str() : "";
      j["conditions"] = v.conditions;
      j["notes"] = v.notes;
      jcmds.push_back(std::move(j));
    }
  }

  void emitSimple(const std::string& head, const std::string& body) {
    lines.push_back(head + ": " + body);
    if (opt.json) {
      Json j;
      j["command"] = head;
      j["status"] = "OK";
      j["result"] = body;
      jcmds.push_back(std::move(j));
    }
  }

  void let(const LetStmt& s) {
    if (env.find(s.name)) fail(s.pos, "'" + s.name + "' is already bound");
    Value v;
    if (std::holds_alternative<Expr>(s.rhs))
      v = evalExpr(std::get<Expr>(s.rhs), env);
    else if (std::holds_alternative<ClassDecl>(s.rhs))
      v = evalClassDecl(std::get<ClassDecl>(s.rhs), env);
    else
      v = evalOpDecl(std::get<OpDecl>(s.rhs));
    env.bindings.emplace_back(s.name, std::move(v));
  }

  void run(const Command& c) {
    const std::string head = fmtCommand(c);
    switch (c.op) {
      case Command::Op::Print:
        emitSimple(head, evalExpr(*c.expr, env).str());
        break;
      case Command::Op::Compose:
        emitVerdict(head, composeClasses(classOf(c.names[0], c.pos),
                                         classOf(c.names[1], c.pos)));
        break;
      case Command::Op::Adjoint: {
        try {
          emitSimple(head,
                     adjointClass(classOf(c.names[0], c.pos), c.delta).str());
        } catch (const Error& e) {
          if (dynamic_cast<const DslError*>(&e)) throw;
          fail(c.pos, e.what());
        }
        break;
      }
      case Command::Op::Include:
        emitVerdict(head, includeInto(classOf(c.names[0], c.pos),
                                      *kindFromName(c.word)));
        break;
      case Command::Op::Fourier:
        emitVerdict(head, fourierRule(c.word == "tophysical"
                                          ? FourierDirection::ToPhysical
                                          : FourierDirection::ToSymbolic,
                                      classOf(c.names[0], c.pos)));
        break;
      case Command::Op::Verdict: {
        MappingQuestion q = c.word == "phg"       ? MappingQuestion::Phg
                            : c.word == "bounded" ? MappingQuestion::SobolevBounded
                                                  : MappingQuestion::SobolevCompact;
        IndexSet input = c.expr ? evalExpr(*c.expr, env) : IndexSet::nat();
        emitVerdict(head,
                    mappingVerdict(classOf(c.names[0], c.pos), c.delta, q, input));
        break;
      }
      case Command::Op::Degree: {
        try {
          BesselDegreeInfo info = besselDegree(classOf(c.names[0], c.pos));
          std::string body = info.degree.str() + " pattern " + info.pattern;
          if (info.twisted) body += " twisted";
          emitSimple(head, body);
        } catch (const Error& e) {
          if (dynamic_cast<const DslError*>(&e)) throw;
          fail(c.pos, e.what());
        }
        break;
      }
      case Command::Op::Kernel:
        kernel(head, c);
        break;
      case Command::Op::Ledger:
        ledger(head, c);
        break;
    }
  }

  void kernel(const std::string& head, const Command& c) {
    const OpValue& op = opOf(c.names[0], c.pos);
    try {
      ModelContext ctx =
          ModelContext::make(static_cast<int>(op.spec.eta.size()), c.fdelta,
                             opt.gridMin, opt.gridMax, opt.gridPoints);
      ctx.tolAsym = opt.tolAsym;
      ctx.tolSolve = opt.tolSolve;
      KernelResult k = solveBesselKernel(op.spec, ctx);
      emitSimple(head, "dim=" + std::to_string(k.dim()) +
                           " residual=" + fmtSig(k.residual));
      if (!opt.csvDir.empty()) writeCsv(c.names[0], ctx, k);
    } catch (const Error& e) {
      if (dynamic_cast<const DslError*>(&e)) throw;
      fail(c.pos, e.what());
    }
  }

  void writeCsv(const std::string& name, const ModelContext& ctx,
                const KernelResult& k) {
    std::filesystem::create_directories(opt.csvDir);
    std::filesystem::path file =
        std::filesystem::path(opt.csvDir) / ("kernel_" + name + ".csv");
    std::ofstream out(file);
    out << "x";
    for (int b = 0; b < k.dim(); ++b) out << ",re" << b << ",im" << b;
    out << "\n";
    out.precision(12);
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      out << ctx.x(i);
      for (int b = 0; b < k.dim(); ++b)
        out << "," << k.basis[b].v[i].real() << "," << k.basis[b].v[i].imag();
      out << "\n";
    }
  }

  void ledger(const std::string& head, const Command& c) {
    LedgerInput in;
    in.specb = c.roots;
    in.delta = c.delta;
    in.deltaBar = c.deltaBar;
    in.m = c.m;
    in.n = c.n;
    try {
      Ledger led = parametrixLedger(in, classOf(c.names[0], c.pos));
      lines.push_back(head + ": " + (led.ok() ? "ok" : "failed"));
      std::istringstream is(led.str());
      std::string line;
      std::vector<std::string> body;
      while (std::getline(is, line)) {
        lines.push_back("  " + line);
        body.push_back(line);
      }
      if (opt.json) {
        Json j;
        j["command"] = head;
        j["status"] = led.ok() ? "OK" : "FAIL";
        j["steps"] = body;
        jcmds.push_back(std::move(j));
      }
    } catch (const Error& e) {
      if (dynamic_cast<const DslError*>(&e)) throw;
      fail(c.pos, e.what());
    }
  }
};

}  // namespace

std::string Diagnostic::str() const {
  return "error " + std::to_string(pos.line) + ":" + std::to_string(pos.col) +
         ": " + message;
}

Script parseScript(const std::string& text) {
  Parser p(text);
  return p.parse();
}

std::string formatExpr(const Expr& e) {
  switch (e.tag) {
    case Expr::Tag::Literal:
      return e.literal.str();
    case Expr::Tag::Name:
      return e.name;
    case Expr::Tag::EU: {
      std::string s = "EU(";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) s += ", ";
        s += formatExpr(e.args[i]);
      }
      return s + ")";
    }
    case Expr::Tag::Sum: {
      std::string s;
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) s += " + ";
        s += formatExpr(e.args[i]);
      }
      return s;
    }
    case Expr::Tag::Shift:
      return "shift(" + formatExpr(e.args[0]) + ", " + e.scalar.str() + ")";
    case Expr::Tag::Conj:
      return "conj(" + formatExpr(e.args[0]) + ")";
    case Expr::Tag::Trunc:
      return "trunc(" + formatExpr(e.args[0]) + ", " + ratToString(e.cut) + ")";
    case Expr::Tag::Lead:
      return "lead(" + formatExpr(e.args[0]) + ")";
  }
  return "";
}

std::string formatScript(const Script& s) {
  std::string out;
  for (const auto& st : s.stmts) {
    if (std::holds_alternative<LetStmt>(st.node)) {
      const auto& let = std::get<LetStmt>(st.node);
      out += "let " + let.name + " = ";
      if (std::holds_alternative<Expr>(let.rhs))
        out += formatExpr(std::get<Expr>(let.rhs));
      else if (std::holds_alternative<ClassDecl>(let.rhs))
        out += fmtClassDecl(std::get<ClassDecl>(let.rhs));
      else
        out += fmtOpDecl(std::get<OpDecl>(let.rhs));
    } else {
      out += fmtCommand(std::get<Command>(st.node));
    }
    out += "\n";
  }
  return out;
}

RunResult runScript(const Script& s, const RunOptions& options) {
  Runner r(options);
  try {
    for (const auto& st : s.stmts) {
      if (std::holds_alternative<LetStmt>(st.node))
        r.let(std::get<LetStmt>(st.node));
      else
        r.run(std::get<Command>(st.node));
    }
  } catch (const DslError& e) {
    std::string rep;
    for (const auto& l : r.lines) rep += l + "\n";
    rep += e.diag.str() + "\n";
    return RunResult{rep, 1};
  } catch (const std::exception& e) {
    return RunResult{std::string("internal error: ") + e.what() + "\n", 2};
  }
  if (options.json) return RunResult{r.jcmds.dump(2) + "\n", 0};
  std::string rep;
  for (const auto& l : r.lines) rep += l + "\n";
  return RunResult{rep, 0};
}

}  // namespace phg
