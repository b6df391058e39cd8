#include "ergolab/katok.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

namespace ergolab {

namespace {

using State = std::array<double, 6>;  // s, u, Phi11, Phi12, Phi21, Phi22

Vec2 minimal_lift(const TorusPoint& x) { return torus_diff(x, {0.0, 0.0}); }

State ode_rhs(const KatokMap& m, const State& y) {
  const double s = y[0], u = y[1];
  const double r2 = s * s + u * u;
  const double ps = katok_psi(m, r2);
  const double dp = katok_dpsi(m, r2);
  const double L = m.log_lambda;
  // velocity field (contracting coordinate first) and its Jacobian
  const double a11 = -L * (ps + 2.0 * s * s * dp);
  const double a12 = -2.0 * L * s * u * dp;
  const double a21 = 2.0 * L * s * u * dp;
  const double a22 = L * (ps + 2.0 * u * u * dp);
  State d;
  d[0] = -L * s * ps;
  d[1] = L * u * ps;
  d[2] = a11 * y[2] + a12 * y[4];
  d[3] = a11 * y[3] + a12 * y[5];
  d[4] = a21 * y[2] + a22 * y[4];
  d[5] = a21 * y[3] + a22 * y[5];
  return d;
}

State rk4_step(const KatokMap& m, const State& y, double h) {
  State k1 = ode_rhs(m, y), t;
  for (int i = 0; i < 6; ++i) t[i] = y[i] + 0.5 * h * k1[i];
  State k2 = ode_rhs(m, t);
  for (int i = 0; i < 6; ++i) t[i] = y[i] + 0.5 * h * k2[i];
  State k3 = ode_rhs(m, t);
  for (int i = 0; i < 6; ++i) t[i] = y[i] + h * k3[i];
  State k4 = ode_rhs(m, t);
  State out;
  for (int i = 0; i < 6; ++i)
    out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

// Integrates position + variational matrix over signed unit time with
// step-doubling error control.  Throws IntegratorUnderflow at the substep cap.
State flow_unit_time(const KatokMap& m, const Vec2& start, double t_end) {
  State y{start.x, start.y, 1, 0, 0, 1};
  double t = 0;
  const double dir = t_end >= 0 ? 1.0 : -1.0;
  double h = dir * 0.0625;
  long substeps = 0;
  while (std::fabs(t_end - t) > 1e-15) {
    if (std::fabs(h) > std::fabs(t_end - t)) h = t_end - t;
    State full = rk4_step(m, y, h);
    State half = rk4_step(m, rk4_step(m, y, h / 2.0), h / 2.0);
    double err = 0;
    for (int i = 0; i < 6; ++i) err = std::max(err, std::fabs(full[i] - half[i]));
    err /= 15.0;  // step-doubling Richardson estimate for a 4th-order method
    substeps += 3;
    if (substeps > m.max_substeps)
      fail(Err::IntegratorUnderflow, "substep cap exceeded near the slowdown core");
    // the additive floor keeps the controller from demanding accuracy below
    // what doubles can measure: at the profile kink (|x| = r0) the estimate
    // only decays like h^3, and a pure relative budget would halve h forever
    double budget = m.ode_tol * std::fabs(h) + 1e-14;
    if (err > budget) {
      h /= 2.0;
      continue;
    }
    y = half;
    t += h;
    if (err < budget / 64.0 && std::fabs(h) < 0.25) h *= 2.0;
  }
  return y;
}

Mat2 frame_matrix(const ToralAutomorphism& T) {
  // columns e_s, e_u — the (s,u) frame as a plane matrix
  return Mat2{T.e_s.x, T.e_u.x, T.e_s.y, T.e_u.y};
}

}  // namespace

double katok_psi(const KatokMap& m, double u) {
  const double u0 = m.r0 * m.r0;
  if (u <= 0) return 0;
  if (u >= u0) return 1;
  return std::pow(u / u0, m.alpha);
}

double katok_dpsi(const KatokMap& m, double u) {
  const double u0 = m.r0 * m.r0;
  if (u <= 0 || u >= u0) return 0;
  return m.alpha * std::pow(u / u0, m.alpha) / u;  // alpha * psi / u
}

KatokMap build_katok_map(i64 a, i64 b, i64 c, i64 d, double r0, double r1, double alpha) {
  KatokMap m;
  m.A = make_toral(a, b, c, d);
  if (m.A.lambda_u <= 1)
    fail(Err::BadInput, "slowdown construction needs a real eigenvalue > 1");
  if (!(alpha > 0 && alpha < 1)) fail(Err::BadInput, "profile exponent must lie in (0,1)");
  if (!(r0 > 0) || !(r0 < r1)) fail(Err::BadRadii, "need 0 < r0 < r1");
  if (!(m.A.lambda_u * r1 < 0.5))
    fail(Err::BadRadii, "gluing disk too large: unit-time image leaves the chart");
  m.r0 = r0;
  m.r1 = r1;
  m.alpha = alpha;
  m.log_lambda = std::log(m.A.lambda_u);
  if (r1 < m.A.lambda_u * r0)
    m.warnings.push_back(
        "r1 < lambda*r0: trajectories through the gluing circle can enter the slowdown "
        "core, so the glued map may disagree with the linear action near the boundary");
  return m;
}

double dist_to_origin(const TorusPoint& x) {
  Vec2 v = minimal_lift(x);
  return std::sqrt(v.x * v.x + v.y * v.y);
}

TorusPoint katok_step(const KatokMap& m, const TorusPoint& x) {
  Vec2 lift = minimal_lift(x);
  if (lift.x * lift.x + lift.y * lift.y >= m.r1 * m.r1) return toral_apply(m.A, x, 1);
  Vec2 su = to_su(m.A, lift);
  State y = flow_unit_time(m, su, 1.0);
  Vec2 xy = from_su(m.A, {y[0], y[1]});
  return {wrap01(xy.x), wrap01(xy.y)};
}

TorusPoint katok_step_back(const KatokMap& m, const TorusPoint& x) {
  // candidate 1: reverse the flow; valid when it lands inside the disk
  Vec2 lift = minimal_lift(x);
  Vec2 su = to_su(m.A, lift);
  State y = flow_unit_time(m, su, -1.0);
  bool ode_valid = y[0] * y[0] + y[1] * y[1] < m.r1 * m.r1;
  // candidate 2: linear preimage; valid when it lies outside the disk
  TorusPoint lin = toral_apply(m.A, x, -1);
  bool lin_valid = dist_to_origin(lin) >= m.r1;
  if (ode_valid && !lin_valid) {
    Vec2 xy = from_su(m.A, {y[0], y[1]});
    return {wrap01(xy.x), wrap01(xy.y)};
  }
  if (lin_valid && !ode_valid) return lin;
  // ambiguous or empty near the gluing circle: keep the candidate whose
  // forward image reproduces x best
  TorusPoint cand_ode{wrap01(from_su(m.A, {y[0], y[1]}).x), wrap01(from_su(m.A, {y[0], y[1]}).y)};
  double err_ode = torus_dist(katok_step(m, cand_ode), x);
  double err_lin = torus_dist(katok_step(m, lin), x);
  if (std::min(err_ode, err_lin) > 1e-8)
    fail(Err::NoConvergence, "no consistent preimage near the gluing circle");
  return err_ode <= err_lin ? cand_ode : lin;
}

Mat2 katok_dstep(const KatokMap& m, const TorusPoint& x) {
  Vec2 lift = minimal_lift(x);
  if (lift.x * lift.x + lift.y * lift.y >= m.r1 * m.r1) return toral_derivative(m.A);
  Vec2 su = to_su(m.A, lift);
  State y = flow_unit_time(m, su, 1.0);
  Mat2 phi{y[2], y[3], y[4], y[5]};
  Mat2 P = frame_matrix(m.A);
  return P.mul(phi).mul(P.inverse());
}

std::pair<double, double> finite_lyapunov(const SurfaceMap& f, const TorusPoint& x, int T,
                                          double* cond_log) {
  if (T < 1) fail(Err::BadInput, "horizon must be >= 1");
  TorusPoint p = x;
  Vec2 q1{1, 0}, q2{0, 1};
  double sum1 = 0, sum2 = 0;
  // scaled accumulated triangular factor, for the condition-number readout
  double R11 = 1, R12 = 0, R22 = 1, logscale = 0;
  for (int t = 0; t < T; ++t) {
    Mat2 J = f.dstep(p);
    Vec2 m1 = J.apply(q1), m2 = J.apply(q2);
    double r11 = std::sqrt(m1.x * m1.x + m1.y * m1.y);
    if (r11 < 1e-300) fail(Err::SingularJacobian, "cocycle column collapsed");
    Vec2 nq1{m1.x / r11, m1.y / r11};
    double r12 = nq1.x * m2.x + nq1.y * m2.y;
    Vec2 w{m2.x - r12 * nq1.x, m2.y - r12 * nq1.y};
    double r22 = std::sqrt(w.x * w.x + w.y * w.y);
    if (r22 < 1e-300) fail(Err::SingularJacobian, "cocycle column collapsed");
    Vec2 nq2{w.x / r22, w.y / r22};
    sum1 += std::log(r11);
    sum2 += std::log(r22);
    // R_step * R_acc with R_step = [[r11, r12], [0, r22]]
    double n11 = r11 * R11, n12 = r11 * R12 + r12 * R22, n22 = r22 * R22;
    double mx = std::max({std::fabs(n11), std::fabs(n12), std::fabs(n22), 1e-300});
    R11 = n11 / mx;
    R12 = n12 / mx;
    R22 = n22 / mx;
    logscale += std::log(mx);
    q1 = nq1;
    q2 = nq2;
    p = f.step(p);
  }
  if (cond_log) {
    // exact 2x2 singular values of the accumulated (scaled) factor
    double a2 = R11 * R11 + R12 * R12 + R22 * R22;
    double det = std::fabs(R11 * R22);
    double mid = a2 / 2.0;
    double off = std::sqrt(std::max(0.0, mid * mid - det * det));
    double smax = std::sqrt(mid + off), smin = std::sqrt(std::max(1e-300, mid - off));
    *cond_log = std::log(smax / smin);
  }
  double c1 = sum1 / T, c2 = sum2 / T;
  if (c1 < c2) std::swap(c1, c2);
  return {c1, c2};
}

std::vector<OrbitRow> orbit_series(const KatokMap& m, const TorusPoint& x0, int T) {
  if (T < 0) fail(Err::BadInput, "negative horizon");
  KatokSurface f(m);
  std::vector<OrbitRow> rows;
  rows.reserve(std::size_t(T) + 1);
  TorusPoint p{wrap01(x0.x), wrap01(x0.y)};
  Vec2 q1{1, 0}, q2{0, 1};
  double sum1 = 0, sum2 = 0;
  for (int t = 0; t <= T; ++t) {
    OrbitRow r;
    r.t = t;
    r.x = p.x;
    r.y = p.y;
    r.in_disk = dist_to_origin(p) < m.r1;
    r.chi_plus_run = t == 0 ? 0.0 : std::max(sum1, sum2) / t;
    rows.push_back(r);
    if (t == T) break;
    Mat2 J = f.dstep(p);
    Vec2 m1 = J.apply(q1), m2 = J.apply(q2);
    double r11 = std::sqrt(m1.x * m1.x + m1.y * m1.y);
    Vec2 nq1{m1.x / r11, m1.y / r11};
    double r12 = nq1.x * m2.x + nq1.y * m2.y;
    Vec2 w{m2.x - r12 * nq1.x, m2.y - r12 * nq1.y};
    double r22 = std::sqrt(w.x * w.x + w.y * w.y);
    sum1 += std::log(r11);
    sum2 += std::log(r22);
    q1 = nq1;
    q2 = {w.x / r22, w.y / r22};
    p = f.step(p);
  }
  return rows;
}

BlockCheckReport pesin_block_check(const SurfaceMap& f, const TorusPoint& x, int T, double beta1,
                                   double beta2, double eps, int burn_in) {
  if (T < 1 || burn_in < 0) fail(Err::BadInput, "bad window");
  if (!(eps > 0)) fail(Err::BadInput, "eps must be positive");
  const int B = burn_in;
  const int lo = -T - B, hi = T + B;
  // two-sided orbit y[lo..hi], jacobians J[lo..hi-1]
  std::vector<TorusPoint> orbit(std::size_t(hi - lo) + 1);
  auto Y = [&](int t) -> TorusPoint& { return orbit[std::size_t(t - lo)]; };
  Y(0) = {wrap01(x.x), wrap01(x.y)};
  for (int t = 0; t < hi; ++t) Y(t + 1) = f.step(Y(t));
  for (int t = 0; t > lo; --t) Y(t - 1) = f.step_back(Y(t));
  std::vector<Mat2> J(std::size_t(hi - lo));
  auto Jac = [&](int t) -> Mat2& { return J[std::size_t(t - lo)]; };
  for (int t = lo; t < hi; ++t) {
    Jac(t) = f.dstep(Y(t));
    if (std::fabs(Jac(t).det()) < 1e-14) fail(Err::SingularJacobian, "derivative is singular");
  }

  auto push_forward = [&](Vec2 v, int from, int to) {
    for (int t = from; t < to; ++t) {
      v = Jac(t).apply(v);
      double n = std::sqrt(v.x * v.x + v.y * v.y);
      if (n < 1e-300) fail(Err::SplittingNotResolved, "forward vector collapsed");
      v = {v.x / n, v.y / n};
    }
    return v;
  };
  auto pull_back = [&](Vec2 v, int from, int to) {
    for (int t = from; t > to; --t) {
      v = Jac(t - 1).inverse().apply(v);
      double n = std::sqrt(v.x * v.x + v.y * v.y);
      if (n < 1e-300) fail(Err::SplittingNotResolved, "backward vector collapsed");
      v = {v.x / n, v.y / n};
    }
    return v;
  };
  auto angle_between = [](const Vec2& a, const Vec2& b) {
    double cr = std::fabs(a.x * b.y - a.y * b.x);
    double dt = std::fabs(a.x * b.x + a.y * b.y);
    return std::atan2(cr, dt);  // in [0, pi/2]
  };

  // invariant directions on [-T, T], seeded twice for a Cauchy check
  std::vector<Vec2> eu(std::size_t(2 * T) + 1), es(std::size_t(2 * T) + 1);
  const Vec2 seedA{1, 0}, seedB{0.6, 0.8};
  for (int t = -T; t <= T; ++t) {
    Vec2 ua = push_forward(seedA, lo, t), ub = push_forward(seedB, lo, t);
    Vec2 sa = pull_back(seedA, hi, t), sb = pull_back(seedB, hi, t);
    if (angle_between(ua, ub) > 1e-6 || angle_between(sa, sb) > 1e-6) {
      BlockCheckReport bad;
      bad.window = T;
      bad.resolved = false;
      fail(Err::SplittingNotResolved, "invariant directions not Cauchy over the window");
    }
    eu[std::size_t(t + T)] = ua;
    es[std::size_t(t + T)] = sa;
  }

  // cumulative log-factors along the fields: CS/CU[i] = sum over t < i-T
  std::vector<double> CS(std::size_t(2 * T) + 1, 0.0), CU(std::size_t(2 * T) + 1, 0.0);
  for (int t = -T; t < T; ++t) {
    Vec2 js = Jac(t).apply(es[std::size_t(t + T)]);
    Vec2 ju = Jac(t).apply(eu[std::size_t(t + T)]);
    CS[std::size_t(t + T + 1)] = CS[std::size_t(t + T)] + std::log(std::sqrt(js.x * js.x + js.y * js.y));
    CU[std::size_t(t + T + 1)] = CU[std::size_t(t + T)] + std::log(std::sqrt(ju.x * ju.x + ju.y * ju.y));
  }

  BlockCheckReport rep;
  rep.window = T;
  rep.min_angle = 3.2;
  double ka = 0, kb = 0, kc = 0;  // minimal real k forced by each family
  for (int t = -T; t <= T; ++t) {
    double th = angle_between(es[std::size_t(t + T)], eu[std::size_t(t + T)]);
    rep.min_angle = std::min(rep.min_angle, th);
    double logtan = std::log(std::tan(std::min(th, 1.5707)));
    kc = std::max(kc, (-logtan - eps * std::abs(t)) / eps);
    for (int n = 1; n + std::abs(t) <= T; ++n) {
      if (t + n <= T) {
        double L = CS[std::size_t(t + n + T)] - CS[std::size_t(t + T)];
        ka = std::max(ka, (L + (beta1 - eps) * n - eps * std::abs(t)) / eps);
      }
      if (t - n >= -T) {
        double L = -(CU[std::size_t(t + T)] - CU[std::size_t(t - n + T)]);
        kb = std::max(kb, (L + (beta2 - eps) * n - eps * std::abs(t)) / eps);
      }
    }
  }
  rep.worst_a = ka;
  rep.worst_b = kb;
  rep.worst_c = kc;
  rep.min_k = std::max<long long>(1, (long long)std::ceil(std::max({ka, kb, kc}) - 1e-12));
  rep.resolved = true;
  return rep;
}

bool frequency_check(const std::vector<char>& visits, int origin, i64 N, const Rat& p,
                     const Rat& gamma) {
  if (N < 0) fail(Err::BadInput, "N must be >= 0");
  if (gamma.num < 0 || p.num < 0) fail(Err::BadInput, "p and gamma must be >= 0");
  const int W = int(visits.size());
  if (W == 0 || origin < 0 || origin > W) fail(Err::BadInput, "bad window/origin");
  Rat pg = p + gamma;
  i64 D = lcm_i64(pg.den, gamma.den);
  i128 A = i128(pg.num) * (D / pg.den);    // (p+gamma) * D
  i128 C = i128(gamma.num) * (D / gamma.den);  // gamma * D
  // prefix counts and G(m) = c(m)*D - m*A
  std::vector<i128> G(std::size_t(W) + 1);
  i64 c = 0;
  G[0] = 0;
  for (int j = 0; j < W; ++j) {
    c += visits[std::size_t(j)] ? 1 : 0;
    G[std::size_t(j) + 1] = i128(c) * D - i128(j + 1) * A;
  }
  // suffix maxima of G over m in (n, W]
  std::vector<i128> SM(std::size_t(W) + 1);
  SM[std::size_t(W)] = G[std::size_t(W)];
  for (int n = W - 1; n >= 0; --n) SM[std::size_t(n)] = std::max(G[std::size_t(n + 1)], SM[std::size_t(n + 1)]);
  for (int n = 0; n < W; ++n) {
    i128 slack = i128(N) * D + i128(std::llabs(i64(n) - origin)) * C;
    if (SM[std::size_t(n)] > G[std::size_t(n)] + slack) return false;
  }
  return true;
}

i64 frequency_min_n(const std::vector<char>& visits, int origin, const Rat& p, const Rat& gamma,
                    i64 n_cap) {
  if (!frequency_check(visits, origin, n_cap, p, gamma)) return -1;
  i64 lo = 0, hi = n_cap;
  while (lo < hi) {
    i64 mid = lo + (hi - lo) / 2;
    if (frequency_check(visits, origin, mid, p, gamma))
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

CaseBound case_bound_check(i64 N, const Rat& gamma, const Rat& p0, const Rat& p1, i64 k, i64 n) {
  if (!(Rat(0) < p0)) fail(Err::BadInput, "p0 must be positive");
  if (k < 1) fail(Err::BadInput, "k must be >= 1");
  CaseBound out;
  Rat slack = Rat(N) + Rat(n < 0 ? -n : n) * gamma;
  if (Rat(k) * p0 <= slack) {
    out.which = 1;
    out.k_bound = slack / p0;
  } else {
    out.which = 2;
    out.rate = Rat(1) - p1 - p0 - gamma;
  }
  return out;
}

double slowdown_time_integral(const KatokMap& m, double tol) {
  // adaptive Simpson of 1/psi on [eps, 1]; the endpoint singularity u^{-alpha}
  // is integrable for alpha < 1 and the truncation below eps is O(eps^{1-alpha})
  auto g = [&](double u) { return 1.0 / katok_psi(m, u); };
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double a, double b, double fa, double fm, double fb, double whole, int depth) {
        double mid = (a + b) / 2.0;
        double lm = (a + mid) / 2.0, rm = (mid + b) / 2.0;
        double flm = g(lm), frm = g(rm);
        double left = (mid - a) / 6.0 * (fa + 4.0 * flm + fm);
        double right = (b - mid) / 6.0 * (fm + 4.0 * frm + fb);
        if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
          return left + right + (left + right - whole) / 15.0;
        return rec(a, mid, fa, flm, fm, left, depth - 1) +
               rec(mid, b, fm, frm, fb, right, depth - 1);
      };
  const double a = 1e-16, b = 1.0;
  double fa = g(a), fb = g(b), fm = g((a + b) / 2.0);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return rec(a, b, fa, fm, fb, whole, 60);
}

double measure_lambda_v(const KatokMap& m, double exclude_r, int samples, std::uint64_t seed) {
  if (samples < 1) fail(Err::BadInput, "need samples");
  if (!(exclude_r >= 0) || exclude_r >= 0.5) fail(Err::BadInput, "bad exclusion radius");
  Rng rng(seed);
  double best = std::numeric_limits<double>::infinity();
  int kept = 0;
  long tries = 0;
  while (kept < samples) {
    if (++tries > 1000L * samples) fail(Err::BadInput, "exclusion region rejects everything");
    TorusPoint x{rng.uniform(), rng.uniform()};
    if (dist_to_origin(x) <= exclude_r) continue;
    ++kept;
    Vec2 w = katok_dstep(m, x).apply(m.A.e_u);
    best = std::min(best, std::sqrt(w.x * w.x + w.y * w.y));
  }
  return best;
}

}  // namespace ergolab
