#include "ergolab/shadowing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ergolab {

namespace {

// Cumulative corrections beyond this sup-norm make the minimal-lift
// bookkeeping on the torus ambiguous; windows that need more are rejected.
constexpr double kMaxCorrection = 0.25;

Vec2 jump_of(const SurfaceMap& f, const TorusPoint& a, const TorusPoint& b) {
  return torus_diff(f.step(a), b);  // minimal lift of f(a) - b
}

// Unit eigenvector of a 2x2 matrix for the eigenvalue of largest (want_major)
// or smallest modulus.  Falls back to a coordinate axis when the spectrum
// is complex or defective — callers treat that as "no usable frame yet".
Vec2 eigendirection(const Mat2& J, bool want_major) {
  double tr = J.a + J.d;
  double det = J.det();
  double disc = tr * tr - 4.0 * det;
  if (disc <= 0) return want_major ? Vec2{1, 0} : Vec2{0, 1};
  double sq = std::sqrt(disc);
  double l1 = (tr + sq) / 2.0, l2 = (tr - sq) / 2.0;  // l1 >= l2
  double lam = want_major ? (std::fabs(l1) >= std::fabs(l2) ? l1 : l2)
                          : (std::fabs(l1) < std::fabs(l2) ? l1 : l2);
  // rows of (J - lam I) are orthogonal to the eigenvector; take the larger row
  double r1x = J.a - lam, r1y = J.b;
  double r2x = J.c, r2y = J.d - lam;
  double n1 = r1x * r1x + r1y * r1y, n2 = r2x * r2x + r2y * r2y;
  Vec2 v = n1 >= n2 ? Vec2{-r1y, r1x} : Vec2{-r2y, r2x};
  double nv = std::sqrt(v.x * v.x + v.y * v.y);
  if (nv == 0) return want_major ? Vec2{1, 0} : Vec2{0, 1};
  return {v.x / nv, v.y / nv};
}

double cross2(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

}  // namespace

PseudoOrbit pseudo_orbit_from_points(const SurfaceMap& f, const std::vector<TorusPoint>& pts) {
  if (pts.size() < 2) fail(Err::BadInput, "pseudo-orbit needs at least 2 points");
  PseudoOrbit po;
  po.points = pts;
  po.jumps.reserve(pts.size() - 1);
  for (std::size_t n = 0; n + 1 < pts.size(); ++n) {
    Vec2 e = jump_of(f, pts[n], pts[n + 1]);
    po.jumps.push_back(e);
    po.delta = std::max(po.delta, e.norm_inf());
  }
  return po;
}

PseudoOrbit perturbed_orbit(const SurfaceMap& f, const TorusPoint& x0, int n_steps, double delta,
                            std::uint64_t seed) {
  if (n_steps < 1) fail(Err::BadInput, "need at least one step");
  if (delta < 0) fail(Err::BadInput, "negative jump size");
  Rng rng(seed);
  std::vector<TorusPoint> pts;
  pts.reserve(std::size_t(n_steps) + 1);
  pts.push_back({wrap01(x0.x), wrap01(x0.y)});
  for (int n = 0; n < n_steps; ++n) {
    TorusPoint y = f.step(pts.back());
    Vec2 e{delta * (2.0 * rng.uniform() - 1.0), delta * (2.0 * rng.uniform() - 1.0)};
    pts.push_back(torus_add(y, {-e.x, -e.y}));  // jump e_n = f(x_n) - x_{n+1}
  }
  return pseudo_orbit_from_points(f, pts);
}

PseudoOrbit single_jump_orbit(const SurfaceMap& f, const TorusPoint& x0, int n_steps, int m,
                              double delta, std::uint64_t seed) {
  if (n_steps < 1 || m < 0 || m >= n_steps) fail(Err::BadInput, "jump index outside window");
  Rng rng(seed);
  std::vector<TorusPoint> pts;
  pts.reserve(std::size_t(n_steps) + 1);
  pts.push_back({wrap01(x0.x), wrap01(x0.y)});
  for (int n = 0; n < n_steps; ++n) {
    TorusPoint y = f.step(pts.back());
    if (n == m) {
      Vec2 e{delta * (2.0 * rng.uniform() - 1.0), delta * (2.0 * rng.uniform() - 1.0)};
      y = torus_add(y, {-e.x, -e.y});
    }
    pts.push_back(y);
  }
  return pseudo_orbit_from_points(f, pts);
}

ShadowResult linear_shadow(const ToralAutomorphism& T, const PseudoOrbit& po) {
  const std::size_t N = po.jumps.size();
  if (po.points.size() != N + 1) fail(Err::BadInput, "inconsistent pseudo-orbit");
  // jump coordinates along the eigenbasis
  std::vector<Vec2> esu(N);
  for (std::size_t n = 0; n < N; ++n) esu[n] = to_su(T, po.jumps[n]);
  // stable coefficients forward: ds_{n+1} = lambda_s * ds_n + es_n, ds_0 = 0;
  // unstable backward: du_n = (du_{n+1} - eu_n)/lambda_u, du_N = 0.
  std::vector<double> ds(N + 1, 0.0), du(N + 1, 0.0);
  for (std::size_t n = 0; n < N; ++n) ds[n + 1] = T.lambda_s * ds[n] + esu[n].x;
  for (std::size_t n = N; n-- > 0;) du[n] = (du[n + 1] - esu[n].y) / T.lambda_u;

  ShadowResult out;
  out.shadow_constant = 1.0 / (1.0 - std::fabs(T.lambda_s)) + 1.0 / (T.lambda_u - 1.0);
  out.points.resize(N + 1);
  out.corrections.resize(N + 1);
  for (std::size_t n = 0; n <= N; ++n) {
    Vec2 corr = from_su(T, {ds[n], du[n]});
    out.corrections[n] = corr;
    out.points[n] = torus_add(po.points[n], corr);
    out.tracking = std::max(out.tracking, corr.norm_inf());
  }
  if (out.tracking >= kMaxCorrection)
    fail(Err::BadInput, "corrections reach the torus ambiguity scale; shorten the window");
  LinearToralMap f(T);
  for (std::size_t n = 0; n < N; ++n)
    out.residual = std::max(out.residual, jump_of(f, out.points[n], out.points[n + 1]).norm_inf());
  out.iterations = 0;
  out.converged = true;
  return out;
}

ShadowResult newton_shadow(const SurfaceMap& f, const PseudoOrbit& po, double tol, int max_iter) {
  const std::size_t N = po.jumps.size();
  if (po.points.size() != N + 1) fail(Err::BadInput, "inconsistent pseudo-orbit");
  if (tol <= 0 || max_iter < 1) fail(Err::BadInput, "bad Newton controls");

  std::vector<TorusPoint> z = po.points;
  std::vector<Vec2> g(N);
  auto residual_of = [&](const std::vector<TorusPoint>& w) {
    double r = 0;
    for (std::size_t n = 0; n < N; ++n) {
      g[n] = jump_of(f, w[n], w[n + 1]);
      r = std::max(r, g[n].norm_inf());
    }
    return r;
  };

  ShadowResult best;
  best.points = z;
  best.residual = residual_of(z);
  best.iterations = 0;
  best.converged = best.residual <= tol;

  std::vector<Mat2> J(N);
  std::vector<Vec2> su(N + 1), uu(N + 1);
  std::vector<double> mu(N), nu(N), a(N + 1), b(N + 1);

  int iter = 0;
  double res = best.residual;
  while (res > tol && iter < max_iter) {
    for (std::size_t n = 0; n < N; ++n) {
      J[n] = f.dstep(z[n]);
      if (std::fabs(J[n].det()) < 1e-14) fail(Err::SingularJacobian, "derivative is singular");
    }
    // unstable frame forward from the major eigendirection of J_0
    uu[0] = eigendirection(J[0], true);
    for (std::size_t n = 0; n < N; ++n) {
      Vec2 w = J[n].apply(uu[n]);
      double nw = std::sqrt(w.x * w.x + w.y * w.y);
      if (nw < 1e-14) fail(Err::SingularJacobian, "unstable frame collapsed");
      uu[n + 1] = {w.x / nw, w.y / nw};
      nu[n] = nw;
    }
    // stable frame backward from the minor eigendirection at the last point
    su[N] = eigendirection(f.dstep(z[N]), false);
    for (std::size_t n = N; n-- > 0;) {
      Mat2 Ji = J[n].inverse();
      Vec2 w = Ji.apply(su[n + 1]);
      double nw = std::sqrt(w.x * w.x + w.y * w.y);
      if (nw < 1e-14) fail(Err::SingularJacobian, "stable frame collapsed");
      su[n] = {w.x / nw, w.y / nw};
      mu[n] = 1.0 / nw;  // J_n s_n = mu_n s_{n+1} by construction
    }
    for (std::size_t n = 0; n <= N; ++n)
      if (std::fabs(cross2(su[n], uu[n])) < 1e-10)
        fail(Err::SingularJacobian, "stable/unstable frames nearly parallel");

    // coordinates of g_n in the frame at n+1, then the two sweeps
    a[0] = 0.0;
    b[N] = 0.0;
    std::vector<double> p(N), q(N);
    for (std::size_t n = 0; n < N; ++n) {
      double d = cross2(su[n + 1], uu[n + 1]);
      p[n] = cross2(g[n], uu[n + 1]) / d;   // stable coordinate
      q[n] = -cross2(g[n], su[n + 1]) / d;  // unstable coordinate
    }
    for (std::size_t n = 0; n < N; ++n) a[n + 1] = mu[n] * a[n] + p[n];
    for (std::size_t n = N; n-- > 0;) b[n] = (b[n + 1] - q[n]) / nu[n];

    double track = 0;
    for (std::size_t n = 0; n <= N; ++n) {
      Vec2 delta{a[n] * su[n].x + b[n] * uu[n].x, a[n] * su[n].y + b[n] * uu[n].y};
      z[n] = torus_add(z[n], delta);
      track = std::max(track, torus_diff(z[n], po.points[n]).norm_inf());
    }
    if (track >= kMaxCorrection)
      fail(Err::BadInput, "corrections reach the torus ambiguity scale; shorten the window");

    ++iter;
    res = residual_of(z);
    if (res < best.residual) {
      best.points = z;
      best.residual = res;
      best.iterations = iter;
    }
  }

  best.converged = best.residual <= tol;
  best.iterations = iter;
  best.corrections.resize(N + 1);
  for (std::size_t n = 0; n <= N; ++n) {
    best.corrections[n] = torus_diff(best.points[n], po.points[n]);
    best.tracking = std::max(best.tracking, best.corrections[n].norm_inf());
  }
  best.shadow_constant = po.delta > 0 ? best.tracking / po.delta : 0.0;
  return best;
}

std::vector<BudgetRow> shadow_budget_report(const PseudoOrbit& po, double c, double eps0,
                                            double eps, const std::vector<int>& s_indices) {
  if (s_indices.size() != po.jumps.size())
    fail(Err::BadInput, "need one block index per jump");
  if (c <= 0 || eps0 <= 0 || eps < 0) fail(Err::BadInput, "bad budget scales");
  std::vector<BudgetRow> rows;
  rows.reserve(po.jumps.size());
  for (std::size_t n = 0; n < po.jumps.size(); ++n) {
    BudgetRow r;
    r.n = int(n);
    r.jump = po.jumps[n].norm_inf();
    r.budget = c * eps0 * std::exp(-eps * double(s_indices[n]));
    r.within = r.jump <= r.budget;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace ergolab
