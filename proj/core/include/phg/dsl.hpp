#pragma once
// Plain-text batch language for the calculus: index-set expressions,
// operator-class declarations, Bessel operator specs, and commands that
// drive composition, adjoints, ledgers, and the numeric kernel solver.
// Parsing produces an AST with source spans; formatting emits a canonical
// text whose re-parse is a fixed point; running produces a deterministic
// report.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "phg/operator_class.hpp"

namespace phg {

struct SourcePos {
  int line = 1;
  int col = 1;
};

struct Diagnostic {
  SourcePos pos;
  std::string message;
  std::string str() const;  // "error <line>:<col>: <message>"
};

// Parse or evaluation failure carrying a spanned diagnostic.
class DslError : public Error {
public:
  explicit DslError(Diagnostic d) : Error(d.str()), diag(std::move(d)) {}
  Diagnostic diag;
};

// ---- AST ------------------------------------------------------------------

struct Expr {
  enum class Tag { Literal, Name, EU, Sum, Shift, Conj, Trunc, Lead };
  Tag tag = Tag::Literal;
  SourcePos pos;
  IndexSet literal;        // Literal (normalized at parse time)
  std::string name;        // Name
  std::vector<Expr> args;  // operands of EU / Sum; single operand otherwise
  ComplexExact scalar;     // Shift amount
  Rat cut;                 // Trunc threshold
};

// Argument of a class declaration, in source order.
struct ClassArg {
  std::string key;  // "lf", "of", "twist", "m", "n", ...
  SourcePos pos;
  std::variant<Expr, Twist, int> value;
};

struct ClassDecl {
  std::string keyword;  // surface keyword, e.g. "trace", "tboundary"
  Kind kind = Kind::VeryResidual;
  SourcePos pos;
  std::vector<ClassArg> args;
};

// `op m=<int> { (j,alpha): coeff, ... } eta=[..]`; alpha is a bare natural
// (one eta variable, or the zero multi-index) or a parenthesized tuple.
struct OpDecl {
  SourcePos pos;
  int m = 2;
  std::vector<std::pair<std::pair<int, std::vector<int>>, double>> coeffs;
  std::vector<double> eta;
};

struct LetStmt {
  std::string name;
  SourcePos pos;
  std::variant<Expr, ClassDecl, OpDecl> rhs;
};

struct Command {
  enum class Op {
    Print,    // print <expr>
    Compose,  // compose A B
    Adjoint,  // adjoint A delta=<rat>
    Include,  // include A <KindName>
    Fourier,  // fourier tophysical|tosymbolic A
    Verdict,  // verdict A delta=<rat> phg|bounded|compact [input=<expr>]
    Degree,   // degree A
    Kernel,   // kernel OP delta=<float>
    Ledger,   // ledger roots=[(mu,mult),..] delta=<rat> deltabar=<rat>
              //        m=<int> n=<int> Q
  };
  Op op = Op::Print;
  SourcePos pos;
  std::vector<std::string> names;  // operand bindings, in order
  std::optional<Expr> expr;        // print operand / verdict input
  Rat delta, deltaBar;
  double fdelta = 0.0;             // kernel weight (numeric position)
  std::string word;                // fourier direction / kind / question
  std::vector<std::pair<ComplexExact, int>> roots;  // ledger roots
  int m = 2, n = 1;
};

struct Stmt {
  std::variant<LetStmt, Command> node;
};

struct Script {
  std::vector<Stmt> stmts;
};

// ---- parse / format -------------------------------------------------------

Script parseScript(const std::string& text);  // throws DslError

// Canonical text: one statement per line, single spaces, literals in the
// normalized (Re, Im, l) order. parse(format(parse(t))) formats identically.
std::string formatScript(const Script& s);
std::string formatExpr(const Expr& e);

// ---- run ------------------------------------------------------------------

struct RunOptions {
  bool json = false;
  double tolAsym = 1e-6;
  double tolSolve = 1e-8;
  double gridMin = 1e-6;
  double gridMax = 1e3;
  int gridPoints = 8001;
  unsigned seed = 1;
  std::string csvDir;  // empty: no CSV side files
};

struct RunResult {
  std::string report;  // text, or a JSON array when options.json
  int exitCode = 0;    // 0 ok, 1 diagnostics, 2 internal
};

// Executes the commands in order; deterministic byte-stable output. Verdict
// lines end with the citation tag of the licensing rule. A failed or
// rule-less verdict is reported, not fatal; unbound names and type errors
// abort with exit code 1.
RunResult runScript(const Script& s, const RunOptions& options = {});

}  // namespace phg
