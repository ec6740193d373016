#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "phg/dsl.hpp"

using namespace phg;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::filesystem::path> corpus() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(PHG_SCRIPTS_DIR))
    if (e.path().extension() == ".phg") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  REQUIRE(!out.empty());
  return out;
}

std::string runText(const std::string& src, int expectExit = 0,
                    RunOptions opt = {}) {
  RunResult r = runScript(parseScript(src), opt);
  CHECK(r.exitCode == expectExit);
  return r.report;
}

}  // namespace

TEST_CASE("index-set expressions evaluate through the language") {
  CHECK(runText("print {(1/2,0)}") == "print {(1/2,0)}: {(1/2,0)}\n");
  CHECK(runText("print EU({(0,0)},{(0,0)})") ==
        "print EU({(0,0)}, {(0,0)}): {(0,1)}\n");
  CHECK(runText("print INF + {(0,0)}") == "print INF + {(0,0)}: INF\n");
  CHECK(runText("print shift(conj({(1/2+1i,0)}), -1/2)") ==
        "print shift(conj({(1/2+1i,0)}), -1/2): {(0-1i,0)}\n");
  CHECK(runText("print trunc({(0,0)}, 3/2)") ==
        "print trunc({(0,0)}, 3/2): {(2,0)}\n");
  CHECK(runText("let E = {(0,0),(1/2,1)}\nprint lead(E)") ==
        "print lead(E): {(0,0),(1/2,1)}\n");
}

TEST_CASE("diagnostics carry source positions") {
  auto pos = [](const std::string& src) -> std::string {
    try {
      runScript(parseScript(src));
      return "";
    } catch (const DslError& e) {
      return std::to_string(e.diag.pos.line) + ":" +
             std::to_string(e.diag.pos.col);
    }
  };
  CHECK(pos("let E = {(1/2 0)}") == "1:15");  // missing comma
  CHECK(pos("let E = {(1/0,0)}") == "1:13");  // zero denominator
  CHECK(pos("\nbogus X") == "2:1");           // unknown statement
  CHECK(pos("let let = {(0,0)}") == "1:5");   // reserved name

  SUBCASE("evaluation errors are diagnostics, not crashes") {
    RunResult r = runScript(parseScript("print nope"));
    CHECK(r.exitCode == 1);
    CHECK(r.report.find("'nope' is not bound") != std::string::npos);
    r = runScript(parseScript("let E = {(0,0)}\nlet E = {(1,0)}"));
    CHECK(r.exitCode == 1);
    CHECK(r.report.find("already bound") != std::string::npos);
  }
  SUBCASE("deep nesting is rejected, not a stack overflow") {
    std::string deep;
    for (int i = 0; i < 500; ++i) deep += "conj(";
    CHECK_THROWS_AS(parseScript("print " + deep), DslError);
  }
}

TEST_CASE("parse then format is a fixed point on the script corpus") {
  for (const auto& p : corpus()) {
    CAPTURE(p.string());
    std::string once = formatScript(parseScript(slurp(p)));
    std::string twice = formatScript(parseScript(once));
    CHECK(once == twice);
  }
}

TEST_CASE("every corpus script runs cleanly and reproducibly") {
  for (const auto& p : corpus()) {
    CAPTURE(p.string());
    Script sc = parseScript(slurp(p));
    RunResult a = runScript(sc);
    CHECK(a.exitCode == 0);
    CHECK(!a.report.empty());
    RunResult b = runScript(sc);
    CHECK(a.report == b.report);  // byte-stable
  }
}

TEST_CASE("verdict lines end with the licensing citation") {
  std::string rep = runText(
      "let T = trace(of={(-1/2,0)}, ff={(0,0)}, n=2)\n"
      "let K = poisson(of={(1/2,0)}, ff={(0,0)}, n=2)\n"
      "compose T K");
  std::istringstream is(rep);
  std::string line;
  int verdicts = 0;
  while (std::getline(is, line)) {
    if (line.find("note:") != std::string::npos) continue;
    ++verdicts;
    CHECK(line.substr(line.size() - 1) == "]");
    CHECK(line.rfind(" [thm:") != std::string::npos);
  }
  CHECK(verdicts == 2);
}

TEST_CASE("failed inequalities are reported, not fatal") {
  std::string rep = runText(
      "let T = trace(of={(-1/2,0)}, ff={(0,0)}, n=2)\n"
      "let K = poisson(of={(-1/2,0)}, ff={(0,0)}, n=2)\n"
      "compose T K");
  CHECK(rep.find("FAIL Re(E_of+F_of)=-1 <= -1") != std::string::npos);
}

TEST_CASE("json reports have stable key order") {
  RunOptions opt;
  opt.json = true;
  std::string rep = runText("print {(0,0)}", 0, opt);
  CHECK(rep.find("\"command\"") < rep.find("\"status\""));
  CHECK(rep.find("\"status\"") < rep.find("\"result\""));
  CHECK(rep == runText("print {(0,0)}", 0, opt));
}

TEST_CASE("bessel declarations accept floats and multi-indices") {
  std::string src =
      "let OP = op m=2 { (2,0): 1, (0,0): -0.25, (0,(2,0)): 1, (0,(0,2)): 1 } "
      "eta=[0.6,0.8]\n";
  Script sc = parseScript(src);
  std::string once = formatScript(sc);
  CHECK(formatScript(parseScript(once)) == once);

  SUBCASE("mismatched multi-index length is a diagnostic") {
    RunResult r = runScript(
        parseScript("let OP = op m=2 { (2,0): 1, (0,(2,0)): 1 } eta=[1]"));
    CHECK(r.exitCode == 1);
    CHECK(r.report.find("multi-index") != std::string::npos);
  }
  SUBCASE("symbolic positions reject floats") {
    CHECK_THROWS_AS(parseScript("print {(0.5,0)}"), DslError);
  }
}

TEST_CASE("kernel command reports dimension and residual") {
  RunOptions opt;
  opt.gridPoints = 4001;
  std::string rep = runText(
      "let OP = op m=2 { (2,0): 1, (0,0): -0.25, (0,2): 1 } eta=[1]\n"
      "kernel OP delta=-1",
      0, opt);
  CHECK(rep.find("kernel OP delta=-1: dim=1 residual=") != std::string::npos);

  SUBCASE("csv side file is written on request") {
    opt.csvDir = (std::filesystem::temp_directory_path() / "phg_csv").string();
    std::string rep2 = runText(
        "let OP = op m=1 { (1,0): 1, (0,0): -0.7 } eta=[1]\n"
        "kernel OP delta=0",
        0, opt);
    std::filesystem::path f = std::filesystem::path(opt.csvDir) / "kernel_OP.csv";
    CHECK(std::filesystem::exists(f));
    std::string csv = slurp(f);
    CHECK(csv.substr(0, 9) == "x,re0,im0");
    std::filesystem::remove_all(opt.csvDir);
  }
}

TEST_CASE("fuzzed inputs never crash the parser") {
  std::mt19937 rng(20240817);
  const std::string alphabet =
      "{}()[],+-=:/ \t\n0123456789iEUletprintcomposeshift#INFtrace";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> len(0, 160);
  int parsed = 0;
  for (int it = 0; it < 2000; ++it) {
    std::string s;
    int n = len(rng);
    for (int k = 0; k < n; ++k) s += alphabet[pick(rng)];
    try {
      parseScript(s);
      ++parsed;
    } catch (const DslError&) {
      // a spanned diagnostic is the expected outcome
    }
  }
  CHECK(parsed >= 0);  // reaching here means no crash

  SUBCASE("mutated corpus scripts never crash either") {
    for (const auto& p : corpus()) {
      std::string base = slurp(p);
      for (int it = 0; it < 50; ++it) {
        std::string s = base;
        std::uniform_int_distribution<std::size_t> at(0, s.size() - 1);
        for (int k = 0; k < 5; ++k) s[at(rng)] = alphabet[pick(rng)];
        try {
          parseScript(s);
        } catch (const DslError&) {
        }
      }
    }
  }
}
