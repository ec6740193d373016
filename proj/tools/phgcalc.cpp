// Batch driver for the calculus language: parses one script file, runs it,
// and prints the report to standard output. Exit codes: 0 success, 1
// diagnostics (bad flags, unreadable input, parse or evaluation errors),
// 2 internal errors.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "phg/dsl.hpp"

int main(int argc, char** argv) {
  CLI::App app{"phgcalc: index-set calculus and half-line Bessel models"};
  std::string file;
  phg::RunOptions opt;
  std::string grid;
  bool formatOnly = false;
  app.add_option("script", file, "script file to run")->required();
  app.add_flag("--json", opt.json, "emit a JSON report");
  app.add_flag("--format", formatOnly,
               "print the canonical form of the script instead of running it");
  app.add_option("--tol-asym", opt.tolAsym, "asymptotic-fit tolerance");
  app.add_option("--tol-solve", opt.tolSolve, "ODE residual tolerance");
  app.add_option("--grid", grid, "numeric grid as min:max:points");
  app.add_option("--seed", opt.seed, "seed for randomized commands");
  app.add_option("--csv", opt.csvDir, "directory for CSV side files");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (!grid.empty()) {
    std::istringstream is(grid);
    std::string a, b, c;
    if (!std::getline(is, a, ':') || !std::getline(is, b, ':') ||
        !std::getline(is, c)) {
      std::cerr << "error: --grid expects min:max:points\n";
      return 1;
    }
    try {
      opt.gridMin = std::stod(a);
      opt.gridMax = std::stod(b);
      opt.gridPoints = std::stoi(c);
    } catch (const std::exception&) {
      std::cerr << "error: --grid expects numbers min:max:points\n";
      return 1;
    }
    if (!(opt.gridMin > 0.0) || !(opt.gridMax > opt.gridMin) ||
        opt.gridPoints < 16) {
      std::cerr << "error: --grid needs 0 < min < max and at least 16 points\n";
      return 1;
    }
  }

  std::ifstream in(file);
  if (!in) {
    std::cerr << "error: cannot read '" << file << "'\n";
    return 1;
  }
  std::stringstream buf;
  buf << in.rdbuf();

  phg::Script script;
  try {
    script = phg::parseScript(buf.str());
  } catch (const phg::DslError& e) {
    std::cerr << file << ": " << e.diag.str() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }

  if (formatOnly) {
    std::cout << phg::formatScript(script);
    return 0;
  }
  phg::RunResult r = phg::runScript(script, opt);
  std::cout << r.report;
  return r.exitCode;
}
