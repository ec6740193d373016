#include "phg/bessel.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <iomanip>
#include <sstream>
#include <random>

namespace phg {

namespace {

namespace ode = boost::numeric::odeint;

std::string fmtSci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3) << v;
  return os.str();
}
using State = std::vector<Cx>;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool finiteCx(const Cx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

// ---- compiled operator ----------------------------------------------------

struct BesselOp {
  int m = 0;
  // per order j: list of (power of x, coefficient), from summing the
  // eta-contracted multi-index terms
  std::vector<std::vector<std::pair<int, Cx>>> pw;
  bool euler = true;  // no x-dependence: pure indicial operator

  Cx c(int j, double x) const {
    Cx acc = 0;
    for (const auto& [p, co] : pw[j]) acc += co * std::pow(x, p);
    return acc;
  }
  // Cauchy-style bound on the size of local characteristic roots, used to
  // budget shooting segments.
  double rate(double x) const {
    double cm = std::abs(c(m, x));
    double r = 1.0;
    for (int j = 0; j < m; ++j) {
      double cj = std::abs(c(j, x));
      if (cj > 0.0) r = std::max(r, 2.0 * std::pow(cj / cm, 1.0 / (m - j)));
    }
    return r;
  }
};

BesselOp compileOp(const BesselSpec& spec) {
  if (spec.m <= 0) throw Error("Bessel operator order m must be positive");
  BesselOp op;
  op.m = spec.m;
  op.pw.assign(spec.m + 1, {});
  for (const auto& [key, L] : spec.coeffs) {
    const auto& [j, alpha] = key;
    if (j < 0 || j > spec.m)
      throw Error("Bessel coefficient order " + std::to_string(j) +
                  " outside 0.." + std::to_string(spec.m));
    Cx fac = 1.0;
    int p = 0;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
      if (alpha[k] < 0) throw Error("negative multi-index entry");
      double e = k < spec.eta.size() ? spec.eta[k] : 0.0;
      for (int q = 0; q < alpha[k]; ++q) fac *= Cx(0.0, e);
      p += alpha[k];
    }
    if (p > 0) op.euler = false;
    bool found = false;
    for (auto& [pp, co] : op.pw[j])
      if (pp == p) {
        co += L * fac;
        found = true;
      }
    if (!found) op.pw[j].push_back({p, L * fac});
  }
  if (op.pw[op.m].empty())
    throw Error("Bessel operator has no order-m coefficient");
  return op;
}

// ---- polynomial roots via companion matrix --------------------------------

std::vector<Cx> polyRoots(std::vector<Cx> c) {
  double scale = 0.0;
  for (const Cx& z : c) scale = std::max(scale, std::abs(z));
  if (scale == 0.0) throw Error("root finding on the zero polynomial");
  while (c.size() > 1 && std::abs(c.back()) < 1e-14 * scale) c.pop_back();
  const int k = static_cast<int>(c.size()) - 1;
  if (k == 0) return {};
  Mat A = Mat::Zero(k, k);
  for (int i = 1; i < k; ++i) A(i, i - 1) = 1.0;
  for (int i = 0; i < k; ++i) A(i, k - 1) = -c[i] / c[k];
  Eigen::ComplexEigenSolver<Mat> es(A, false);
  std::vector<Cx> r(es.eigenvalues().data(), es.eigenvalues().data() + k);
  return r;
}

// Interpolates grid samples at an arbitrary point of s; NaN off the grid or
// when a stencil sample is NaN.
Cx sInterp(const ModelContext& ctx, const std::vector<Cx>& vals, double sq) {
  const int N = static_cast<int>(vals.size());
  if (N < 7) return Cx(kNaN, kNaN);
  double p = (sq - ctx.s.front()) / ctx.h;
  if (p < -1e-9 || p > N - 1 + 1e-9) return Cx(kNaN, kNaN);
  p = std::clamp(p, 0.0, double(N - 1));
  int a = static_cast<int>(std::lround(p)) - 3;
  a = std::clamp(a, 0, N - 7);
  Cx acc = 0;
  for (int j = 0; j < 7; ++j) {
    if (!finiteCx(vals[a + j])) return Cx(kNaN, kNaN);
    double w = 1.0;
    for (int k = 0; k < 7; ++k)
      if (k != j) w *= (p - (a + k)) / double(j - k);
    acc += w * vals[a + j];
  }
  return acc;
}

// Finite-difference weights on an arbitrary stencil (Fornberg's recursion):
// out[k][j] is the weight of node x[j] for the k-th derivative at z.
std::vector<std::vector<double>> fdWeights(double z, const std::vector<double>& x,
                                           int m) {
  const int n = static_cast<int>(x.size());
  std::vector<std::vector<double>> c(m + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0, c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    int mn = std::min(i, m);
    double c2 = 1.0, c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

// ---- ODE integration ------------------------------------------------------

struct OdeRhs {
  const BesselOp* op;
  const ModelContext* ctx;
  const std::vector<Cx>* forcing;  // grid samples of the right-hand side

  void operator()(const State& y, State& dy, double s) const {
    const int m = op->m;
    dy.resize(m);
    for (int j = 0; j + 1 < m; ++j) dy[j] = y[j + 1];
    double x = std::exp(s);
    Cx acc = 0;
    if (forcing) {
      Cx f = sInterp(*ctx, *forcing, s);
      acc = finiteCx(f) ? f : Cx(0);
    }
    for (int j = 0; j < m; ++j) acc -= op->c(j, x) * y[j];
    dy[m - 1] = acc / op->c(m, x);
  }
};

void integrateTo(const OdeRhs& rhs, State& y, double s0, double s1) {
  if (s0 == s1) return;
  auto stepper = ode::make_controlled(1e-13, 1e-12, ode::runge_kutta_dopri5<State>());
  double dt = (s1 - s0) / 16.0;
  ode::integrate_adaptive(stepper, rhs, y, s0, s1, dt);
}

// High-order extended-precision variant used for the continuous sweeps: the
// defect of the reconstructed function is measured pointwise by finite
// differences, which amplify per-point jitter by 1/h^2, so the integration
// noise has to sit below the double rounding floor.
using CxL = std::complex<long double>;
using StateL = std::vector<CxL>;

struct OdeRhsL {
  const BesselOp* op;

  void operator()(const StateL& y, StateL& dy, long double s) const {
    const int m = op->m;
    dy.resize(m);
    for (int j = 0; j + 1 < m; ++j) dy[j] = y[j + 1];
    long double x = std::exp(s);
    CxL acc = 0, cm = 0;
    for (int j = 0; j <= m; ++j) {
      CxL cj = 0;
      for (const auto& [p, co] : op->pw[j])
        cj += CxL(co.real(), co.imag()) * std::pow(x, (long double)p);
      if (j == m)
        cm = cj;
      else
        acc -= cj * y[j];
    }
    dy[m - 1] = acc / cm;
  }
};

void integrateFine(const OdeRhsL& rhs, StateL& y, long double s0, long double s1) {
  if (s0 == s1) return;
  auto stepper = ode::make_controlled(
      (long double)1e-19, (long double)1e-17,
      ode::runge_kutta_fehlberg78<StateL, long double>());
  long double dt = (s1 - s0) / 16.0L;
  ode::integrate_adaptive(stepper, rhs, y, s0, s1, dt);
}

double stateNorm(const Vec& y) { return y.norm(); }

// ---- multiple shooting ----------------------------------------------------

struct Shooting {
  ModelContext ctx;
  BesselOp op;
  std::vector<int> nodes;  // grid indices of segment boundaries
  std::vector<Mat> phi;    // per-segment propagators in s
  Mat SL;                  // admissible directions at the left end
  Mat SR;                  // decaying directions at the right end
  Mat G;                   // row-scaled matching matrix
  std::vector<double> rowScale;
  Eigen::BDCSVD<Mat> svd;
  int K = 0, m = 0, dL = 0, dR = 0, cols = 0;

  int unknownsOfNode(int i) const {  // offset of Y_i, 1 <= i <= K-1
    return dL + m * (i - 1);
  }

  Vec nodeState(const Vec& u, int i) const {
    if (i == 0) return SL * u.head(dL);
    if (i == K) return SR * u.tail(dR);
    return u.segment(unknownsOfNode(i), m);
  }

  HalfLineFn reconstruct(const Vec& u, const std::vector<Cx>* forcing) const;
  std::vector<Vec> nullspace() const;
  Vec leastSquares(const std::vector<Cx>& forcing) const;
  // One continuous integration over the whole grid, rescaled periodically so
  // the dynamic range never overflows; the result is defined up to scale.
  HalfLineFn sweep(bool forward, Vec y0) const;
  std::vector<HalfLineFn> kernelFunctions() const;
};

Shooting makeShooting(const BesselSpec& spec, const ModelContext& ctx) {
  Shooting sh;
  sh.ctx = ctx;
  sh.op = compileOp(spec);
  const int m = sh.m = sh.op.m;
  const int N = static_cast<int>(ctx.size());
  if (N < 16) throw Error("grid too coarse for the kernel solver");

  // leading coefficient must not vanish on the grid
  double cmin = std::numeric_limits<double>::infinity(), cmax = 0.0;
  for (int i = 0; i < N; ++i) {
    double a = std::abs(sh.op.c(m, ctx.x(i)));
    cmin = std::min(cmin, a);
    cmax = std::max(cmax, a);
  }
  if (cmin <= 1e-12 * (1.0 + cmax))
    throw Error("leading Bessel coefficient vanishes on the grid");

  // segment boundaries: cap the integrated growth rate per segment
  const double cap = 10.0;
  sh.nodes.push_back(0);
  double budget = 0.0;
  for (int i = 0; i + 1 < N; ++i) {
    budget += sh.op.rate(ctx.x(i)) * ctx.h;
    if (budget >= cap && i + 1 < N - 1) {
      sh.nodes.push_back(i + 1);
      budget = 0.0;
    }
  }
  sh.nodes.push_back(N - 1);
  sh.K = static_cast<int>(sh.nodes.size()) - 1;

  // propagators
  OdeRhs rhs{&sh.op, &sh.ctx, nullptr};
  sh.phi.resize(sh.K);
  for (int i = 0; i < sh.K; ++i) {
    Mat P(m, m);
    for (int k = 0; k < m; ++k) {
      State y(m, Cx(0));
      y[k] = 1.0;
      integrateTo(rhs, y, ctx.s[sh.nodes[i]], ctx.s[sh.nodes[i + 1]]);
      for (int j = 0; j < m; ++j) P(j, k) = y[j];
    }
    sh.phi[i] = P;
  }

  // left seeds from the indicial roots right of the weight line
  auto roots = indicialRoots(indicialPolynomial(spec));
  for (const auto& r : roots)
    if (std::abs(r.root.real() - ctx.delta) <= 1e-6)
      throw Error("weight delta is indicial (within 1e-6 of a root)");
  std::vector<Eigen::VectorXcd> seeds;
  const double s0 = ctx.s.front();
  for (const auto& r : roots) {
    if (r.root.real() <= ctx.delta) continue;
    for (int l = 0; l <= r.logMultiplicity; ++l) {
      // derivatives of e^{mu s} s^l: polynomial part evolves by p -> mu p + p'
      std::vector<Cx> p(l + 1, Cx(0));
      p[l] = 1.0;
      Eigen::VectorXcd y(m);
      Cx e = std::exp(r.root * s0);
      for (int j = 0; j < m; ++j) {
        Cx val = 0;
        for (int q = 0; q <= l; ++q) val += p[q] * std::pow(s0, q);
        y(j) = e * val;
        std::vector<Cx> np(l + 1, Cx(0));
        for (int q = 0; q <= l; ++q) {
          np[q] += r.root * p[q];
          if (q + 1 <= l) np[q] += double(q + 1) * p[q + 1];
        }
        p = np;
      }
      y.normalize();
      seeds.push_back(y);
    }
  }
  sh.dL = static_cast<int>(seeds.size());
  sh.SL = Mat(m, sh.dL);
  for (int k = 0; k < sh.dL; ++k) sh.SL.col(k) = seeds[k];

  // right end: decaying directions of the frozen characteristic polynomial;
  // for a pure indicial (Euler) operator there is no exponential dichotomy at
  // infinity and the right end is left unconstrained
  if (sh.op.euler) {
    sh.SR = Mat::Identity(m, m);
  } else {
    std::vector<Cx> cpoly(m + 1);
    double xe = ctx.x(N - 1);
    for (int j = 0; j <= m; ++j) cpoly[j] = sh.op.c(j, xe);
    Mat raw(m, 0);
    for (const Cx& z : polyRoots(cpoly)) {
      if (z.real() >= 0.0) continue;
      Eigen::VectorXcd col(m);
      Cx pw = 1.0;
      for (int j = 0; j < m; ++j) {
        col(j) = pw;
        pw *= z;
      }
      col.normalize();
      raw.conservativeResize(Eigen::NoChange, raw.cols() + 1);
      raw.col(raw.cols() - 1) = col;
    }
    if (raw.cols() > 0) {
      Eigen::BDCSVD<Mat> rsvd(raw, Eigen::ComputeThinU | Eigen::ComputeThinV);
      int rank = 0;
      for (int i = 0; i < rsvd.singularValues().size(); ++i)
        if (rsvd.singularValues()(i) > 1e-8 * rsvd.singularValues()(0)) ++rank;
      sh.SR = rsvd.matrixU().leftCols(rank);
    } else {
      sh.SR = Mat(m, 0);
    }
  }
  sh.dR = static_cast<int>(sh.SR.cols());

  // global matching system in the unknowns (a, Y_1..Y_{K-1}, b)
  const int K = sh.K;
  sh.cols = sh.dL + m * (K - 1) + sh.dR;
  Mat G = Mat::Zero(m * K, sh.cols);
  for (int i = 0; i < K; ++i) {
    // Phi_i * state_i - state_{i+1} = 0
    if (i == 0)
      G.block(0, 0, m, sh.dL) = sh.phi[0] * sh.SL;
    else
      G.block(m * i, sh.unknownsOfNode(i), m, m) = sh.phi[i];
    if (i + 1 == K)
      G.block(m * i, sh.cols - sh.dR, m, sh.dR) = -sh.SR;
    else
      G.block(m * i, sh.unknownsOfNode(i + 1), m, m) -= Mat::Identity(m, m);
  }
  sh.rowScale.resize(m * K, 1.0);
  for (int r = 0; r < m * K; ++r) {
    double nrm = G.row(r).norm();
    if (nrm > 0.0) {
      sh.rowScale[r] = 1.0 / nrm;
      G.row(r) *= sh.rowScale[r];
    }
  }
  sh.G = std::move(G);
  sh.svd.compute(sh.G, Eigen::ComputeThinU | Eigen::ComputeFullV);
  sh.svd.setThreshold(1e-8);
  return sh;
}

std::vector<Vec> Shooting::nullspace() const {
  std::vector<Vec> out;
  if (cols == 0) return out;
  int rank = static_cast<int>(svd.rank());
  for (int k = rank; k < cols; ++k) out.push_back(svd.matrixV().col(k));
  return out;
}

Vec Shooting::leastSquares(const std::vector<Cx>& forcing) const {
  // end states of the per-segment particular solutions starting from zero
  OdeRhs rhs{&op, &ctx, &forcing};
  Vec b = Vec::Zero(m * K);
  for (int i = 0; i < K; ++i) {
    State y(m, Cx(0));
    integrateTo(rhs, y, ctx.s[nodes[i]], ctx.s[nodes[i + 1]]);
    for (int j = 0; j < m; ++j) b(m * i + j) = -y[j] * rowScale[m * i + j];
  }
  return svd.solve(b);
}

HalfLineFn Shooting::reconstruct(const Vec& u, const std::vector<Cx>* forcing) const {
  HalfLineFn f;
  f.v.assign(ctx.size(), Cx(0));
  OdeRhs rhs{&op, &ctx, forcing};
  for (int i = 0; i < K; ++i) {
    Vec Sa = nodeState(u, i), Sb = nodeState(u, i + 1);
    int a = nodes[i], b = nodes[i + 1];
    if (stateNorm(Sa) <= stateNorm(Sb)) {
      State y(Sa.data(), Sa.data() + m);
      f.v[a] = y[0];
      for (int k = a; k < b; ++k) {
        integrateTo(rhs, y, ctx.s[k], ctx.s[k + 1]);
        f.v[k + 1] = y[0];
      }
    } else {
      State y(Sb.data(), Sb.data() + m);
      f.v[b] = y[0];
      for (int k = b; k > a; --k) {
        integrateTo(rhs, y, ctx.s[k], ctx.s[k - 1]);
        f.v[k - 1] = y[0];
      }
    }
  }
  return f;
}

HalfLineFn Shooting::sweep(bool forward, Vec y0) const {
  const int N = static_cast<int>(ctx.size());
  HalfLineFn f;
  f.v.assign(N, Cx(0));
  constexpr long kNoScale = std::numeric_limits<long>::min();
  std::vector<long> iexp(N, kNoScale);  // accumulated power-of-two scale
  OdeRhsL rhs{&op};
  StateL y(m);
  for (int j = 0; j < m; ++j) y[j] = CxL(y0(j).real(), y0(j).imag());
  long acc = 0;
  auto put = [&](int i) {
    f.v[i] = Cx((double)y[0].real(), (double)y[0].imag());
    iexp[i] = acc;
  };
  // rescale only by exact powers of two so the bookkeeping is lossless
  auto renorm = [&] {
    long double nrm = 0.0L;
    for (const CxL& z : y) nrm = std::max(nrm, std::abs(z));
    if (nrm == 0.0L) return;
    int e = std::ilogb(nrm);
    if (std::abs(e) > 500) {
      for (CxL& z : y)
        z = CxL(std::scalbln(z.real(), -(long)e), std::scalbln(z.imag(), -(long)e));
      acc += e;
    }
  };
  if (forward) {
    put(0);
    for (int k = 0; k + 1 < N; ++k) {
      integrateFine(rhs, y, ctx.s[k], ctx.s[k + 1]);
      renorm();
      put(k + 1);
    }
  } else {
    put(N - 1);
    for (int k = N - 1; k > 0; --k) {
      integrateFine(rhs, y, ctx.s[k], ctx.s[k - 1]);
      renorm();
      put(k - 1);
    }
  }
  // flatten the per-point scales, normalizing the peak to order one; the
  // power-of-two shifts are exact
  double best = -std::numeric_limits<double>::infinity();
  long e0 = 0;
  for (int i = 0; i < N; ++i) {
    double mag = std::abs(f.v[i]);
    if (iexp[i] == kNoScale || mag == 0.0) continue;
    double val = iexp[i] * 0.6931471805599453 + std::log(mag);
    if (val > best) {
      best = val;
      e0 = iexp[i] + std::ilogb(mag);
    }
  }
  for (int i = 0; i < N; ++i) {
    if (iexp[i] == kNoScale) {
      f.v[i] = 0;
      continue;
    }
    long shift = iexp[i] - e0;
    f.v[i] = Cx(std::scalbln(f.v[i].real(), shift), std::scalbln(f.v[i].imag(), shift));
  }
  return f;
}

std::vector<HalfLineFn> Shooting::kernelFunctions() const {
  std::vector<Vec> null = nullspace();
  std::vector<HalfLineFn> fns;
  if (null.empty()) return fns;
  if (op.euler) {
    // no exponential dichotomy: a forward pass from the admissible seeds is
    // smooth and any cross-contamination stays inside the kernel span
    for (const Vec& v : null) fns.push_back(sweep(true, SL * v.head(dL)));
  } else if (dR == 1) {
    // the decaying solution dominates when integrated from the far end
    // backwards, so a single continuous pass reproduces it without the node
    // mismatches of a segment-wise rebuild
    fns.push_back(sweep(false, SR.col(0)));
    for (std::size_t k = 1; k < null.size(); ++k)
      fns.push_back(reconstruct(null[k], nullptr));
  } else {
    for (const Vec& v : null) fns.push_back(reconstruct(v, nullptr));
  }
  return fns;
}

// Orthonormalizes in the weighted inner product; drops numerically dependent
// members.
std::vector<HalfLineFn> orthonormalize(const ModelContext& ctx,
                                       std::vector<HalfLineFn> fns) {
  std::vector<HalfLineFn> out;
  for (auto& f : fns) {
    double orig = ctx.norm(f);
    if (orig == 0.0) continue;
    for (const auto& g : out) {
      Cx c = ctx.inner(f, g);
      for (std::size_t i = 0; i < f.v.size(); ++i) f.v[i] -= c * g.v[i];
    }
    double nrm = ctx.norm(f);
    if (nrm < 1e-8 * orig) continue;
    for (auto& z : f.v) z /= nrm;
    out.push_back(std::move(f));
  }
  return out;
}

double kernelResidual(const BesselSpec& spec, const ModelContext& ctx,
                      const std::vector<HalfLineFn>& basis) {
  // weighted L^2 grid norm of the defect, the natural norm of the space
  double worst = 0.0;
  for (const auto& f : basis) {
    HalfLineFn r = applyBessel(spec, ctx, f);
    for (auto& z : r.v)
      if (!finiteCx(z)) z = 0;
    worst = std::max(worst, ctx.norm(r));
  }
  return worst;
}

KernelResult kernelFromShooting(const BesselSpec& spec, const Shooting& sh) {
  KernelResult res;
  res.basis = orthonormalize(sh.ctx, sh.kernelFunctions());
  res.residual = kernelResidual(spec, sh.ctx, res.basis);
  if (res.residual > sh.ctx.tolSolve)
    throw Error("kernel solver residual " + fmtSci(res.residual) +
                " exceeds tolSolve");
  return res;
}

std::vector<Cx> nanToZero(const HalfLineFn& u) {
  std::vector<Cx> v = u.v;
  for (auto& z : v)
    if (!finiteCx(z)) z = 0;
  return v;
}

}  // namespace

// ---- cache handle ---------------------------------------------------------

struct ShootingCache {
  Shooting sh;
};

// ---- ModelContext ---------------------------------------------------------

ModelContext ModelContext::make(int n, double delta, double xmin, double xmax,
                                int points) {
  if (n <= 0) throw Error("boundary dimension must be positive");
  if (!(xmin > 0.0 && xmax > xmin)) throw Error("grid needs 0 < xmin < xmax");
  if (points < 2) throw Error("grid needs at least two points");
  ModelContext ctx;
  ctx.n = n;
  ctx.delta = delta;
  double a = std::log(xmin), b = std::log(xmax);
  ctx.h = (b - a) / (points - 1);
  ctx.s.resize(points);
  for (int i = 0; i < points; ++i) ctx.s[i] = a + i * ctx.h;
  return ctx;
}

Cx ModelContext::inner(const HalfLineFn& u, const HalfLineFn& w) const {
  const std::size_t N = size();
  if (u.v.size() != N || w.v.size() != N)
    throw Error("function not sampled on this grid");
  // Simpson weights; for an even point count the last interval is trapezoid
  std::size_t M = (N % 2 == 1) ? N : N - 1;
  Cx acc = 0;
  auto term = [&](std::size_t i, double wt) {
    if (finiteCx(u.v[i]) && finiteCx(w.v[i]))
      acc += wt * u.v[i] * std::conj(w.v[i]) * std::exp(-2.0 * delta * s[i]);
  };
  for (std::size_t i = 0; i < M; ++i) {
    double wt = (i == 0 || i + 1 == M) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    term(i, wt * h / 3.0);
  }
  if (N % 2 == 0) {
    term(N - 2, h / 2.0);
    term(N - 1, h / 2.0);
  }
  return acc;
}

double ModelContext::norm(const HalfLineFn& u) const {
  return std::sqrt(std::max(0.0, inner(u, u).real()));
}

HalfLineFn ModelContext::sample(const std::function<Cx(double)>& f) const {
  HalfLineFn out;
  out.v.resize(size());
  for (std::size_t i = 0; i < size(); ++i) out.v[i] = f(x(i));
  return out;
}

// ---- BesselSpec -----------------------------------------------------------

BesselSpec BesselSpec::withEta(std::vector<double> eta2) const {
  BesselSpec s = *this;
  s.eta = std::move(eta2);
  return s;
}

bool BesselSpec::elliptic(int samples, unsigned seed) const {
  int n = static_cast<int>(eta.size());
  double scale = 0.0;
  for (const auto& [k, c] : coeffs) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) return false;
  if (n == 1) {
    // One boundary covariable: the principal symbol is a homogeneous
    // polynomial in two variables, so ellipticity is decided exactly by the
    // real roots of its dehomogenization q(z) = p(z, 1).
    std::vector<Cx> q(m + 1, Cx(0));
    for (const auto& [key, c] : coeffs) {
      const auto& [j, alpha] = key;
      int a = alpha.empty() ? 0 : alpha[0];
      if (j + a == m) q[j] += c;  // the common unit i^m does not move roots
    }
    if (std::abs(q[m]) <= 1e-12 * scale) return false;  // vanishes at eta = 0
    for (const auto& z : polyRoots(q))
      if (std::abs(z.imag()) <= 1e-8 * (1.0 + std::abs(z.real()))) return false;
    return true;
  }
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  for (int it = 0; it < samples; ++it) {
    std::vector<double> xi(n + 1);
    double nrm = 0.0;
    for (auto& v : xi) {
      v = g(rng);
      nrm += v * v;
    }
    nrm = std::sqrt(nrm);
    if (nrm < 1e-8) continue;
    for (auto& v : xi) v /= nrm;
    Cx val = 0;
    for (const auto& [key, c] : coeffs) {
      const auto& [j, alpha] = key;
      int ord = j;
      for (int a : alpha) ord += a;
      if (ord != m) continue;
      Cx term = c * std::pow(Cx(0.0, xi[0]), j);
      for (std::size_t k = 0; k < alpha.size(); ++k)
        for (int q = 0; q < alpha[k]; ++q)
          term *= Cx(0.0, k + 1 < xi.size() ? xi[k + 1] : 0.0);
      val += term;
    }
    if (std::abs(val) <= 1e-10 * scale) return false;
  }
  return true;
}

// ---- indicial data --------------------------------------------------------

std::vector<Cx> indicialPolynomial(const BesselSpec& spec) {
  std::vector<Cx> c(spec.m + 1, Cx(0));
  for (const auto& [key, L] : spec.coeffs) {
    const auto& [j, alpha] = key;
    bool zero = std::all_of(alpha.begin(), alpha.end(), [](int a) { return a == 0; });
    if (zero && j >= 0 && j <= spec.m) c[j] += L;
  }
  return c;
}

std::vector<IndicialRoot> indicialRoots(const std::vector<Cx>& poly) {
  std::vector<Cx> raw = polyRoots(poly);
  double scale = 1.0;
  for (const Cx& z : raw) scale = std::max(scale, std::abs(z));
  int deg = static_cast<int>(raw.size());
  // floating-point root spread of a k-fold root scales like eps^{1/k}; the
  // cluster tolerance has to absorb that
  double tol = std::max(1e-8, 10.0 * std::pow(std::numeric_limits<double>::epsilon(),
                                              1.0 / std::max(1, deg)) *
                                   scale);
  std::vector<std::pair<Cx, int>> clusters;  // (sum, count)
  for (const Cx& z : raw) {
    bool placed = false;
    for (auto& [sum, cnt] : clusters)
      if (std::abs(z - sum / double(cnt)) < tol) {
        sum += z;
        ++cnt;
        placed = true;
        break;
      }
    if (!placed) clusters.push_back({z, 1});
  }
  std::vector<IndicialRoot> out;
  for (const auto& [sum, cnt] : clusters)
    out.push_back({sum / double(cnt), cnt - 1});
  std::sort(out.begin(), out.end(), [](const IndicialRoot& a, const IndicialRoot& b) {
    return a.root.real() != b.root.real() ? a.root.real() < b.root.real()
                                          : a.root.imag() < b.root.imag();
  });
  return out;
}

std::vector<IndicialRoot> criticalRoots(const std::vector<IndicialRoot>& roots,
                                        double delta, double deltaBar) {
  std::vector<IndicialRoot> out;
  for (const auto& r : roots)
    if (r.root.real() > delta && r.root.real() <= deltaBar + 1e-12) out.push_back(r);
  return out;
}

std::vector<std::pair<Cx, int>> criticalBlocks(const std::vector<IndicialRoot>& roots,
                                               double delta, double deltaBar) {
  std::vector<std::pair<Cx, int>> out;
  for (const auto& r : criticalRoots(roots, delta, deltaBar)) {
    int stacked = 0;
    for (const auto& q : roots) {
      if (q.root.real() <= delta) continue;
      Cx d = r.root - q.root;
      double k = std::round(d.real());
      if (std::abs(d.imag()) < 1e-6 && k >= -0.5 && std::abs(d.real() - k) < 1e-6)
        stacked += q.logMultiplicity + 1;
    }
    out.push_back({r.root, stacked - 1});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.first.real() != b.first.real() ? a.first.real() < b.first.real()
                                            : a.first.imag() < b.first.imag();
  });
  return out;
}

// ---- twist matrices -------------------------------------------------------

Mat twistPow(double t, const Cx& alpha, int M) {
  if (!(t > 0.0)) throw Error("twist power needs t > 0");
  if (M < 0) throw Error("twist block size must be nonnegative");
  double lt = std::log(t);
  Cx ta = std::exp(alpha * lt);
  Mat out = Mat::Zero(M + 1, M + 1);
  for (int l = 0; l <= M; ++l)
    for (int j = 0; j <= l; ++j)
      out(j, l) = ta * binom(l, j) * std::pow(lt, l - j);
  return out;
}

Mat twistPow(double t, const std::vector<std::pair<Cx, int>>& blocks) {
  int dim = 0;
  for (const auto& [mu, M] : blocks) dim += M + 1;
  Mat out = Mat::Zero(dim, dim);
  int at = 0;
  for (const auto& [mu, M] : blocks) {
    out.block(at, at, M + 1, M + 1) = twistPow(t, mu, M);
    at += M + 1;
  }
  return out;
}

// ---- grid operations ------------------------------------------------------

HalfLineFn dilate(const ModelContext& ctx, const HalfLineFn& u, double t) {
  if (!(t > 0.0)) throw Error("dilation needs t > 0");
  if (u.v.size() != ctx.size()) throw Error("function not sampled on this grid");
  double lt = std::log(t);
  HalfLineFn out;
  out.v.resize(ctx.size());
  for (std::size_t i = 0; i < ctx.size(); ++i)
    out.v[i] = sInterp(ctx, u.v, ctx.s[i] + lt);
  return out;
}

HalfLineFn applyBessel(const BesselSpec& spec, const ModelContext& ctx,
                       const HalfLineFn& u) {
  if (u.v.size() != ctx.size()) throw Error("function not sampled on this grid");
  BesselOp op = compileOp(spec);
  const int m = op.m, W = 5, N = static_cast<int>(ctx.size());
  std::vector<double> offs(2 * W + 1);
  for (int k = 0; k <= 2 * W; ++k) offs[k] = (k - W) * ctx.h;
  auto w = fdWeights(0.0, offs, m);
  HalfLineFn out;
  out.v.assign(N, Cx(kNaN, kNaN));  // stencil does not fit at the edges
  for (int i = W; i + W < N; ++i) {
    bool bad = false;
    std::vector<Cx> d(m + 1, Cx(0));
    for (int k = 0; k <= 2 * W && !bad; ++k) {
      const Cx& z = u.v[i - W + k];
      if (!finiteCx(z)) {
        bad = true;
        break;
      }
      for (int j = 0; j <= m; ++j) d[j] += w[j][k] * z;
    }
    if (bad) {
      out.v[i] = Cx(kNaN, kNaN);
      continue;
    }
    double x = ctx.x(i);
    Cx acc = 0;
    for (int j = 0; j <= m; ++j) acc += op.c(j, x) * d[j];
    out.v[i] = acc;
  }
  return out;
}

Vec traceCoefficients(const ModelContext& ctx, const HalfLineFn& u, const Cx& mu,
                      int Mtilde, const std::vector<std::pair<Cx, int>>& others) {
  if (u.v.size() != ctx.size()) throw Error("function not sampled on this grid");
  if (Mtilde < 0) throw Error("log order must be nonnegative");
  // columns: the requested block, its next integer shifts, and the other
  // listed exponents with their shifts
  std::vector<std::pair<Cx, int>> cols;
  auto addCol = [&](const Cx& e, int l) {
    for (const auto& [ee, ll] : cols)
      if (ll == l && std::abs(ee - e) < 1e-9) return;
    cols.push_back({e, l});
  };
  for (int k = 0; k <= 3; ++k)
    for (int l = 0; l <= Mtilde; ++l) addCol(mu + double(k), l);
  for (const auto& [nu, Mn] : others)
    for (int k = 0; k <= 3; ++k)
      for (int l = 0; l <= Mn; ++l) addCol(nu + double(k), l);

  // small-x window: the first third of the grid, NaN rows skipped
  double sHi = ctx.s.front() + (ctx.s.back() - ctx.s.front()) / 3.0;
  std::vector<int> rows;
  for (int i = 0; i < static_cast<int>(ctx.size()) && ctx.s[i] <= sHi; ++i)
    if (finiteCx(u.v[i])) rows.push_back(i);
  if (static_cast<int>(rows.size()) < 2 * static_cast<int>(cols.size()) + 8)
    throw Error("asymptotic fit window has too few usable samples");

  Vec b(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) b(r) = u.v[rows[r]];
  double bn = b.norm();
  if (bn < 1e-280) return Vec::Zero(Mtilde + 1);

  Mat A(rows.size(), cols.size());
  Eigen::VectorXd scale(cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const auto& [e, l] = cols[c];
    for (std::size_t r = 0; r < rows.size(); ++r) {
      double s = ctx.s[rows[r]];
      A(r, c) = std::exp(e * s) * std::pow(s, l);
    }
    scale(c) = A.col(c).norm();
    if (scale(c) > 0.0) A.col(c) /= scale(c);
  }
  Eigen::ColPivHouseholderQR<Mat> qr(A);
  Vec sol = qr.solve(b);
  double resid = (A * sol - b).norm() / bn;
  if (resid > ctx.tolAsym)
    throw Error("asymptotic fit residual " + fmtSci(resid) +
                " exceeds tolAsym");
  // the requested block's columns were added first, in log order
  Vec out(Mtilde + 1);
  for (int l = 0; l <= Mtilde; ++l) out(l) = sol(l) / scale(l);
  return out;
}

// ---- kernel solver --------------------------------------------------------

KernelResult solveBesselKernel(const BesselSpec& spec, const ModelContext& ctx) {
  Shooting sh = makeShooting(spec, ctx);
  return kernelFromShooting(spec, sh);
}

// ---- trace family ---------------------------------------------------------

int TraceFamily::dimEL() const {
  int d = 0;
  for (const auto& [mu, M] : blocks) d += M + 1;
  return d;
}

HalfLineFn TraceFamily::project(const HalfLineFn& u) const {
  HalfLineFn out;
  out.v.assign(ctx.size(), Cx(0));
  for (const auto& phi : kernel.basis) {
    Cx c = ctx.inner(u, phi);
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += c * phi.v[i];
  }
  return out;
}

Vec TraceFamily::trace(const HalfLineFn& u) const {
  Vec c(kernel.dim());
  for (int i = 0; i < kernel.dim(); ++i) c(i) = ctx.inner(u, kernel.basis[i]);
  return traceOfBasis * c;
}

TraceFamily besselTraceFamily(const BesselSpec& spec, const ModelContext& ctx,
                              double deltaBar) {
  TraceFamily fam;
  fam.spec = spec;
  fam.ctx = ctx;
  auto roots = indicialRoots(indicialPolynomial(spec));
  fam.blocks = criticalBlocks(roots, ctx.delta, deltaBar);
  if (fam.blocks.empty())
    throw Error("no indicial roots in the critical strip (delta, deltaBar]");
  auto cache = std::make_shared<ShootingCache>();
  cache->sh = makeShooting(spec, ctx);
  fam.kernel = kernelFromShooting(spec, cache->sh);
  fam.cache = cache;
  if (fam.kernel.dim() == 0)
    throw Error("Bessel kernel is trivial; no trace family at this weight");
  fam.traceOfBasis = Mat(fam.dimEL(), fam.kernel.dim());
  for (int i = 0; i < fam.kernel.dim(); ++i) {
    int at = 0;
    for (std::size_t bindex = 0; bindex < fam.blocks.size(); ++bindex) {
      const auto& [mu, M] = fam.blocks[bindex];
      std::vector<std::pair<Cx, int>> others;
      for (std::size_t o = 0; o < fam.blocks.size(); ++o)
        if (o != bindex) others.push_back(fam.blocks[o]);
      Vec c = traceCoefficients(ctx, fam.kernel.basis[i], mu, M, others);
      fam.traceOfBasis.block(at, i, M + 1, 1) = c;
      at += M + 1;
    }
  }
  return fam;
}

Mat calderonSpace(const TraceFamily& fam) {
  Eigen::BDCSVD<Mat> svd(fam.traceOfBasis, Eigen::ComputeThinU | Eigen::ComputeThinV);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-8 * svd.singularValues()(0)) ++rank;
  if (rank < fam.kernel.dim())
    throw Error("trace map is not injective on the kernel (rank " +
                std::to_string(rank) + " < dimension " +
                std::to_string(fam.kernel.dim()) + ")");
  return svd.matrixU().leftCols(rank);
}

// ---- model boundary value problem -----------------------------------------

namespace {

HalfLineFn greenApply(const TraceFamily& fam, const HalfLineFn& v) {
  const Shooting& sh = fam.cache->sh;
  std::vector<Cx> f = nanToZero(v);
  Vec sol = sh.leastSquares(f);
  HalfLineFn u = sh.reconstruct(sol, &f);
  // deflate the kernel component
  HalfLineFn p = fam.project(u);
  for (std::size_t i = 0; i < u.v.size(); ++i) u.v[i] -= p.v[i];
  return u;
}

}  // namespace

BVPResult modelBVPSolve(const TraceFamily& fam, const Mat& sigmaQ, const Mat& khat,
                        const HalfLineFn& v, const Vec& phi) {
  const int E = fam.dimEL();
  if (sigmaQ.rows() != E || sigmaQ.cols() != E || khat.rows() != E ||
      khat.cols() != E || phi.size() != E)
    throw Error("boundary data dimensions do not match the trace family");
  Mat KQ = khat * sigmaQ;
  if ((KQ * KQ - KQ).norm() > 1e-8)
    throw Error("khat*sigmaQ is not idempotent (not a Calderon projector pair)");
  Mat C = calderonSpace(fam);
  Eigen::BDCSVD<Mat> rsvd(sigmaQ * C);
  double smin = rsvd.singularValues()(rsvd.singularValues().size() - 1);
  double smax = rsvd.singularValues()(0);
  if (!(smin > 0.0) || smax / smin > 1e8)
    throw Error("sigmaQ is ill-conditioned on the Calderon space");

  BVPResult res;
  res.u = greenApply(fam, v);
  // boundary part: kernel element whose trace is khat*sigmaQ*(khat*phi)
  Vec target = KQ * (khat * phi);
  Eigen::BDCSVD<Mat> tsvd(fam.traceOfBasis,
                          Eigen::ComputeThinU | Eigen::ComputeThinV);
  tsvd.setThreshold(1e-8);
  Vec c = tsvd.solve(target);
  for (int i = 0; i < fam.kernel.dim(); ++i)
    for (std::size_t k = 0; k < res.u.v.size(); ++k)
      res.u.v[k] += c(i) * fam.kernel.basis[i].v[k];

  HalfLineFn r = applyBessel(fam.spec, fam.ctx, res.u);
  const int W = 5;
  double worst = 0.0;
  for (int i = W; i + W < static_cast<int>(fam.ctx.size()); ++i) {
    if (fam.ctx.x(i) > 50.0) break;
    Cx d = r.v[i] - v.v[i];
    if (finiteCx(d)) worst = std::max(worst, std::abs(d));
  }
  res.residualOde = worst;
  res.residualBc = (sigmaQ * fam.trace(res.u) - phi).lpNorm<Eigen::Infinity>();
  return res;
}

// ---- homogeneity checks ---------------------------------------------------

namespace {

std::vector<HalfLineFn> battery(const ModelContext& ctx) {
  const std::vector<std::pair<double, double>> pq = {
      {0.6, 0.7}, {1.1, 1.3}, {1.7, 0.9}, {2.3, 1.1},
      {0.8, 1.7}, {1.4, 0.6}, {2.0, 1.0}, {0.9, 0.8}};
  std::vector<HalfLineFn> out;
  for (const auto& [p, q] : pq)
    out.push_back(ctx.sample(
        [p = p, q = q](double x) { return std::pow(x, p) * std::exp(-q * x); }));
  return out;
}

std::vector<double> scaledEta(const std::vector<double>& eta, double t) {
  std::vector<double> out = eta;
  for (double& e : out) e *= t;
  return out;
}

double supDiff(const std::vector<Cx>& a, const std::vector<Cx>& b) {
  double diff = 0.0, mag = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!finiteCx(a[i]) || !finiteCx(b[i])) continue;
    diff = std::max(diff, std::abs(a[i] - b[i]));
    mag = std::max(mag, std::abs(a[i]));
  }
  return mag > 0.0 ? diff / mag : diff;
}

}  // namespace

double verifyHomogeneity(HomFamily family, const BesselSpec& spec,
                         const ModelContext& ctx, double t, double deltaBar) {
  if (!(t > 0.0)) throw Error("homogeneity check needs t > 0");
  BesselSpec specT = spec.withEta(scaledEta(spec.eta, t));
  double worst = 0.0;
  switch (family) {
    case HomFamily::Operator: {
      for (const auto& u : battery(ctx)) {
        HalfLineFn a = applyBessel(specT, ctx, u);
        HalfLineFn inner = dilate(ctx, u, 1.0 / t);
        HalfLineFn b = dilate(ctx, applyBessel(spec, ctx, inner), t);
        worst = std::max(worst, supDiff(a.v, b.v));
      }
      return worst;
    }
    case HomFamily::Green: {
      TraceFamily f1 = besselTraceFamily(spec, ctx, deltaBar);
      TraceFamily f2 = besselTraceFamily(specT, ctx, deltaBar);
      for (const auto& v : battery(ctx)) {
        HalfLineFn a = greenApply(f2, v);
        HalfLineFn pulled = dilate(ctx, v, 1.0 / t);
        pulled.v = nanToZero(pulled);
        HalfLineFn b = dilate(ctx, greenApply(f1, pulled), t);
        worst = std::max(worst, supDiff(a.v, b.v));
      }
      return worst;
    }
    case HomFamily::Trace: {
      TraceFamily f1 = besselTraceFamily(spec, ctx, deltaBar);
      TraceFamily f2 = besselTraceFamily(specT, ctx, deltaBar);
      Mat tw = twistPow(t, f1.blocks);
      for (const auto& u : battery(ctx)) {
        Vec a = f2.trace(u);
        Vec b = tw * f1.trace(dilate(ctx, u, 1.0 / t));
        worst = std::max(worst, (a - b).lpNorm<Eigen::Infinity>());
      }
      return worst;
    }
    case HomFamily::Poisson: {
      TraceFamily f1 = besselTraceFamily(spec, ctx, deltaBar);
      TraceFamily f2 = besselTraceFamily(specT, ctx, deltaBar);
      Mat C2 = calderonSpace(f2);
      Eigen::BDCSVD<Mat> s1(f1.traceOfBasis,
                            Eigen::ComputeThinU | Eigen::ComputeThinV);
      Eigen::BDCSVD<Mat> s2(f2.traceOfBasis,
                            Eigen::ComputeThinU | Eigen::ComputeThinV);
      s1.setThreshold(1e-8);
      s2.setThreshold(1e-8);
      Mat twInv = twistPow(1.0 / t, f1.blocks);
      for (int col = 0; col < C2.cols(); ++col) {
        Vec psi = C2.col(col);
        Vec c2 = s2.solve(psi);
        HalfLineFn a;
        a.v.assign(ctx.size(), Cx(0));
        for (int i = 0; i < f2.kernel.dim(); ++i)
          for (std::size_t k = 0; k < a.v.size(); ++k)
            a.v[k] += c2(i) * f2.kernel.basis[i].v[k];
        Vec c1 = s1.solve(twInv * psi);
        HalfLineFn w;
        w.v.assign(ctx.size(), Cx(0));
        for (int i = 0; i < f1.kernel.dim(); ++i)
          for (std::size_t k = 0; k < w.v.size(); ++k)
            w.v[k] += c1(i) * f1.kernel.basis[i].v[k];
        HalfLineFn b = dilate(ctx, w, t);
        worst = std::max(worst, supDiff(a.v, b.v));
      }
      return worst;
    }
  }
  throw Error("unknown homogeneity family");
}

}  // namespace phg
