#pragma once
// Numerical half-line laboratory for the model boundary fiber: indicial data,
// twist matrices, kernels of Bessel families in weighted L_b^2 spaces, trace
// and Poisson families, Calderon spaces, homogeneity checks, and the model
// boundary-value-problem inversion. The independent variable is s = log x on
// a uniform grid, which turns x d/dx into d/ds.

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "phg/index_set.hpp"

namespace phg {

using Cx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// A function sampled on the model grid; entries may be NaN where a dilated
// function leaves the grid (quadrature treats NaN as 0, fits skip it).
struct HalfLineFn {
  std::vector<Cx> v;
};

struct ModelContext {
  int n = 1;               // boundary dimension
  double delta = 0.0;      // weight of x^delta L_b^2
  double tolAsym = 1e-6;   // asymptotic-fit residual tolerance
  double tolSolve = 1e-8;  // ODE residual tolerance
  std::vector<double> s;   // uniform grid in s = log x
  double h = 0.0;          // grid spacing

  static ModelContext make(int n, double delta, double xmin = 1e-6,
                           double xmax = 1e3, int points = 8001);

  std::size_t size() const { return s.size(); }
  double x(std::size_t i) const { return std::exp(s[i]); }

  // Weighted inner product <u,v> = int u vbar x^{-2 delta} dx/x by Simpson
  // quadrature on the s grid; NaN samples contribute 0.
  Cx inner(const HalfLineFn& u, const HalfLineFn& w) const;
  double norm(const HalfLineFn& u) const;

  HalfLineFn sample(const std::function<Cx(double)>& f) const;  // f of x
};

// One scalar model operator: sum over (j, alpha) of L_{j,alpha}
// (x d/dx)^j (i x eta)^alpha, with constant coefficients L_{j,alpha}.
struct BesselSpec {
  int m = 2;
  // key: (j, multi-index alpha over the eta variables)
  std::map<std::pair<int, std::vector<int>>, Cx> coeffs;
  std::vector<double> eta;

  BesselSpec withEta(std::vector<double> eta2) const;
  // Reports whether the principal symbol is nonvanishing on the cosphere:
  // exactly (by root finding) for one boundary variable, by random sampling
  // otherwise.
  bool elliptic(int samples = 200, unsigned seed = 1) const;
};

// ---- indicial data --------------------------------------------------------
// Coefficients of the indicial polynomial sum_j L_{j,0} z^j, degree m.
std::vector<Cx> indicialPolynomial(const BesselSpec& spec);

struct IndicialRoot {
  Cx root;
  int logMultiplicity = 0;  // cluster size minus one
};
// Companion-matrix roots, clustered; throws on the zero polynomial.
std::vector<IndicialRoot> indicialRoots(const std::vector<Cx>& poly);
// Roots with Re in the half-open strip (delta, deltaBar].
std::vector<IndicialRoot> criticalRoots(const std::vector<IndicialRoot>& roots,
                                        double delta, double deltaBar);
// Critical roots paired with the log order they attain once integer-spaced
// roots right of delta stack up: blocks (mu, Mtilde).
std::vector<std::pair<Cx, int>> criticalBlocks(const std::vector<IndicialRoot>& roots,
                                               double delta, double deltaBar);

// ---- twist matrices -------------------------------------------------------
// t^{s_{alpha,M}} on the coefficient vector (c_0..c_M) of x^alpha log^l x:
// entry (j,l) = t^alpha * binom(l,j) (log t)^{l-j}. Closed form, no matrix
// exponential.
Mat twistPow(double t, const Cx& alpha, int M);
// Direct sum over blocks (mu, size M+1) given as (mu, Mtilde) pairs.
Mat twistPow(double t, const std::vector<std::pair<Cx, int>>& blocks);

// ---- grid operations ------------------------------------------------------
// (lambda_t^* u)(x) = u(t x): shift by log t in s, degree-6 interpolation;
// NaN outside the grid.
HalfLineFn dilate(const ModelContext& ctx, const HalfLineFn& u, double t);
// Applies the operator by order-8 central finite differences in s; the few
// stencil-width points at each end are NaN.
HalfLineFn applyBessel(const BesselSpec& spec, const ModelContext& ctx,
                       const HalfLineFn& u);

// Least-squares extraction of the coefficients of x^mu log^l x, l = 0..Mtilde,
// on the small-x window, with correction columns for the next few integer
// shifts and for the other listed exponents. Throws when the fit residual
// exceeds ctx.tolAsym.
Vec traceCoefficients(const ModelContext& ctx, const HalfLineFn& u, const Cx& mu,
                      int Mtilde,
                      const std::vector<std::pair<Cx, int>>& others = {});

// ---- kernel solver --------------------------------------------------------
struct KernelResult {
  std::vector<HalfLineFn> basis;  // orthonormal in x^delta L_b^2
  double residual = 0.0;          // worst finite-difference ODE residual
  int dim() const { return static_cast<int>(basis.size()); }
};
// Basis of the solutions lying in x^delta L_b^2 at 0 and decaying at
// infinity, by multiple shooting and a nullspace extraction. Throws when
// delta is within 1e-6 of an indicial real part or the residual check fails.
KernelResult solveBesselKernel(const BesselSpec& spec, const ModelContext& ctx);

// ---- trace family and Calderon space --------------------------------------
struct ShootingCache;  // opaque solver state reused across solves

struct TraceFamily {
  BesselSpec spec;
  ModelContext ctx;
  std::vector<std::pair<Cx, int>> blocks;  // critical (mu, Mtilde)
  KernelResult kernel;
  Mat traceOfBasis;  // one column of trace data per kernel basis member
  std::shared_ptr<const ShootingCache> cache;

  int dimEL() const;
  // Trace of the orthogonal kernel projection of u, block by block.
  Vec trace(const HalfLineFn& u) const;
  HalfLineFn project(const HalfLineFn& u) const;
};
TraceFamily besselTraceFamily(const BesselSpec& spec, const ModelContext& ctx,
                              double deltaBar);

// Orthonormal basis (columns) of the span of the traces of the kernel basis.
// Throws when the rank drops below the kernel dimension (injectivity failure).
Mat calderonSpace(const TraceFamily& fam);

// ---- model boundary value problem -----------------------------------------
struct BVPResult {
  HalfLineFn u;
  double residualOde = 0.0;  // sup |N u - v| on the check window
  double residualBc = 0.0;   // |sigmaQ a(u) - phi|
};
// Solves N u = v, sigmaQ a(u) = phi as u = G v + b(khat phi), where G is the
// kernel-deflected least-squares inverse and b(psi) is the kernel element
// with a(b psi) = khat sigmaQ psi. Throws when khat*sigmaQ is not idempotent
// onto the Calderon space or the restriction of sigmaQ to it is
// ill-conditioned.
BVPResult modelBVPSolve(const TraceFamily& fam, const Mat& sigmaQ, const Mat& khat,
                        const HalfLineFn& v, const Vec& phi);

// ---- homogeneity checks ---------------------------------------------------
enum class HomFamily { Operator, Green, Trace, Poisson };
// Residual of the dilation law of the chosen family at parameter t, evaluated
// on a fixed battery of decaying test functions.
double verifyHomogeneity(HomFamily family, const BesselSpec& spec,
                         const ModelContext& ctx, double t,
                         double deltaBar = 0.0);

}  // namespace phg
