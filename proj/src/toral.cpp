#include "ergolab/toral.hpp"

#include <algorithm>
#include <cmath>

namespace ergolab {

ToralAutomorphism make_toral(i64 a, i64 b, i64 c, i64 d) {
  i64 det = a * d - b * c;
  if (det != 1 && det != -1)
    fail(Err::NotHyperbolic, "matrix is not unimodular (det = " + std::to_string(det) + ")");
  i64 tr = a + d;
  if ((det == 1 && (tr <= 2 && tr >= -2)) || (det == -1 && tr == 0))
    fail(Err::NotHyperbolic, "eigenvalues on the unit circle");

  ToralAutomorphism T;
  T.a = a; T.b = b; T.c = c; T.d = d;
  double disc = std::sqrt(double(tr) * double(tr) - 4.0 * double(det));
  double l1 = (double(tr) + disc) / 2.0;
  double l2 = (double(tr) - disc) / 2.0;
  if (std::fabs(l1) > std::fabs(l2)) {
    T.lambda_u = l1;
    T.lambda_s = l2;
  } else {
    T.lambda_u = l2;
    T.lambda_s = l1;
  }
  // refine the small eigenvalue through the determinant (avoids cancellation)
  T.lambda_s = double(det) / T.lambda_u;

  auto eigvec = [&](double lam) -> Vec2 {
    Vec2 v;
    if (b != 0) v = {double(b), lam - double(a)};
    else if (c != 0) v = {lam - double(d), double(c)};
    else v = (std::fabs(double(a) - lam) < std::fabs(double(d) - lam)) ? Vec2{1, 0} : Vec2{0, 1};
    double n = v.norm();
    v = v * (1.0 / n);
    // deterministic sign: first nonzero component positive
    if (v.x < 0 || (v.x == 0 && v.y < 0)) v = v * -1.0;
    return v;
  };
  T.e_u = eigvec(T.lambda_u);
  T.e_s = eigvec(T.lambda_s);
  return T;
}

Mat2 toral_derivative(const ToralAutomorphism& T) {
  return {double(T.a), double(T.b), double(T.c), double(T.d)};
}

Vec2 to_su(const ToralAutomorphism& T, const Vec2& xy) {
  // solve xy = s e_s + u e_u
  double det = T.e_s.x * T.e_u.y - T.e_s.y * T.e_u.x;
  return {(xy.x * T.e_u.y - xy.y * T.e_u.x) / det, (T.e_s.x * xy.y - T.e_s.y * xy.x) / det};
}

Vec2 from_su(const ToralAutomorphism& T, const Vec2& su) {
  return su.x * T.e_s + su.y * T.e_u;
}

namespace {

struct IMat {
  i128 a, b, c, d;
};

bool imat_mul_checked(const IMat& x, const IMat& y, IMat& out) {
  // entries stay far below the 127-bit line for |power| <= 62 on any matrix
  // with |entries| <= ~1e4; detect overflow by magnitude guard.  `out` may
  // alias an input, so accumulate locally before writing through.
  const i128 LIM = i128(1) << 120;
  auto mul = [&](i128 p, i128 q, i128& r) {
    if (p != 0 && (q > LIM / (p > 0 ? p : -p) || q < -(LIM / (p > 0 ? p : -p)))) return false;
    r = p * q;
    return true;
  };
  i128 t1, t2;
  IMat res;
  if (!mul(x.a, y.a, t1) || !mul(x.b, y.c, t2)) return false;
  res.a = t1 + t2;
  if (!mul(x.a, y.b, t1) || !mul(x.b, y.d, t2)) return false;
  res.b = t1 + t2;
  if (!mul(x.c, y.a, t1) || !mul(x.d, y.c, t2)) return false;
  res.c = t1 + t2;
  if (!mul(x.c, y.b, t1) || !mul(x.d, y.d, t2)) return false;
  res.d = t1 + t2;
  out = res;
  return true;
}

// frac(m * x) for an integer entry times a double in [0,1), in long double.
// Exact while |m * x| stays within the 64-bit mantissa; beyond that the
// precision decays exactly as fast as the underlying chaotic amplification
// makes pointwise orbits meaningless anyway.
long double frac_entry(i128 m, double x) {
  bool neg = m < 0;
  i128 a = neg ? -m : m;
  long double r;
  if (a < (i128(1) << 62)) {
    r = fmodl((long double)(long long)a * (long double)x, 1.0L);
  } else {
    const long long CHUNK = 1000000000000000000LL;  // 1e18 < 2^63
    i128 hi = a / CHUNK;
    long long lo = (long long)(a % CHUNK);
    long double rh = fmodl((long double)(long long)hi * (long double)x, 1.0L);
    rh = fmodl(rh * (long double)CHUNK, 1.0L);
    long double rl = fmodl((long double)lo * (long double)x, 1.0L);
    r = fmodl(rh + rl, 1.0L);
  }
  return neg ? -r : r;
}

}  // namespace

TorusPoint toral_apply(const ToralAutomorphism& T, const TorusPoint& x, i64 power) {
  if (power == 0) return x;
  const i64 det = T.a * T.d - T.b * T.c;
  // inverse = det * adjugate (integral since det = +-1)
  IMat step = power > 0 ? IMat{T.a, T.b, T.c, T.d}
                        : IMat{det * T.d, -det * T.b, -det * T.c, det * T.a};
  i64 n = power > 0 ? power : -power;

  if (n <= 62) {
    IMat acc{1, 0, 0, 1};
    IMat base = step;
    i64 k = n;
    bool ok = true;
    while (k > 0 && ok) {
      if (k & 1) ok = imat_mul_checked(acc, base, acc);
      k >>= 1;
      if (k > 0 && ok) ok = imat_mul_checked(base, base, base);
    }
    if (ok) {
      long double sx = fmodl(frac_entry(acc.a, x.x) + frac_entry(acc.b, x.y), 1.0L);
      long double sy = fmodl(frac_entry(acc.c, x.x) + frac_entry(acc.d, x.y), 1.0L);
      return {wrap01(double(sx)), wrap01(double(sy))};
    }
  }
  // fallback: repeated single applications
  TorusPoint p = x;
  for (i64 i = 0; i < n; ++i) {
    double nx = double(step.a) * p.x + double(step.b) * p.y;
    double ny = double(step.c) * p.x + double(step.d) * p.y;
    p = {wrap01(nx), wrap01(ny)};
  }
  return p;
}

//---------------------------------------------------------------------------
// Partition machinery
//---------------------------------------------------------------------------
namespace {

struct Interval {
  double lo, hi;
};

Interval img(double lam, double lo, double hi) {
  double a = lam * lo, b = lam * hi;
  return {std::min(a, b), std::max(a, b)};
}

bool contains(const Interval& outer, const Interval& inner, double tol) {
  return outer.lo - tol <= inner.lo && inner.hi <= outer.hi + tol;
}

bool overlaps(const Interval& a, const Interval& b, double tol) {
  return std::min(a.hi, b.hi) - std::max(a.lo, b.lo) > tol;
}

}  // namespace

MarkovPartition load_partition(const ToralAutomorphism& T, std::vector<PartRect> rects,
                               const PartitionCheckOptions& opts) {
  if (rects.empty()) fail(Err::BadInput, "partition needs at least one rectangle");
  for (const auto& r : rects)
    if (!(r.S > 0) || !(r.U > 0)) fail(Err::BadInput, "rectangle with non-positive side");

  MarkovPartition P;
  P.T = T;
  P.rects = std::move(rects);
  const int n = int(P.rects.size());
  P.lat1 = to_su(T, {1, 0});
  P.lat2 = to_su(T, {0, 1});
  for (const auto& r : P.rects) {
    P.S_max = std::max(P.S_max, r.S);
    P.U_max = std::max(P.U_max, r.U);
  }

  // membership shift candidates per rectangle: integer k with
  // (rect in xy) intersecting [0,1)^2 + k
  P.member_shifts.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto& r = P.rects[i];
    double xs[4], ys[4];
    const Vec2 corners[4] = {
        from_su(T, {r.s0, r.u0}), from_su(T, {r.s0 + r.S, r.u0}),
        from_su(T, {r.s0, r.u0 + r.U}), from_su(T, {r.s0 + r.S, r.u0 + r.U})};
    for (int k = 0; k < 4; ++k) {
      xs[k] = corners[k].x;
      ys[k] = corners[k].y;
    }
    int xlo = int(std::floor(*std::min_element(xs, xs + 4))) - 1;
    int xhi = int(std::ceil(*std::max_element(xs, xs + 4))) + 1;
    int ylo = int(std::floor(*std::min_element(ys, ys + 4))) - 1;
    int yhi = int(std::ceil(*std::max_element(ys, ys + 4))) + 1;
    for (int kx = xlo; kx <= xhi; ++kx)
      for (int ky = ylo; ky <= yhi; ++ky) P.member_shifts[i].push_back({kx, ky});
  }

  const double tol = opts.tol;

  // --- tiling audit: coverage and interior disjointness on a seeded sample
  Rng rng(opts.seed);
  auto su_of = [&](const TorusPoint& p) { return to_su(T, {p.x, p.y}); };
  auto clearance_at = [&](const Vec2& su, const PartRect& r) {
    return std::min(std::min(su.x - r.s0, r.s0 + r.S - su.x),
                    std::min(su.y - r.u0, r.u0 + r.U - su.y));
  };
  for (int sample = 0; sample < opts.samples; ++sample) {
    TorusPoint p{rng.uniform(), rng.uniform()};
    Vec2 su = su_of(p);
    int inside_closed = 0, inside_open = 0;
    for (int i = 0; i < n; ++i)
      for (auto [kx, ky] : P.member_shifts[i]) {
        Vec2 cand{su.x + kx * P.lat1.x + ky * P.lat2.x, su.y + kx * P.lat1.y + ky * P.lat2.y};
        double cl = clearance_at(cand, P.rects[i]);
        if (cl >= -1e-12) {
          ++inside_closed;
          if (cl > tol) ++inside_open;
          break;  // count each rectangle at most once
        }
      }
    if (inside_closed == 0)
      fail(Err::CoverageGap, "uncovered point (" + std::to_string(p.x) + ", " +
                                 std::to_string(p.y) + ")");
    if (inside_open > 1)
      fail(Err::OverlapDetected, "interior overlap at (" + std::to_string(p.x) + ", " +
                                     std::to_string(p.y) + ")");
  }

  // --- crossing structure + Markov fiber conditions (interval arithmetic)
  P.crossing.assign(n, {});
  P.B.size = n;
  P.B.rows.assign(n, std::vector<int>(n, 0));
  const double ls = T.lambda_s, lu = T.lambda_u;
  // lattice basis inverse for translate enumeration
  double latdet = P.lat1.x * P.lat2.y - P.lat1.y * P.lat2.x;
  auto lat_coeffs = [&](const Vec2& v) {
    return Vec2{(v.x * P.lat2.y - v.y * P.lat2.x) / latdet,
                (P.lat1.x * v.y - P.lat1.y * v.x) / latdet};
  };
  for (int i = 0; i < n; ++i) {
    const auto& ri = P.rects[i];
    Interval is = img(ls, ri.s0, ri.s0 + ri.S);
    Interval iu = img(lu, ri.u0, ri.u0 + ri.U);
    for (int j = 0; j < n; ++j) {
      const auto& rj = P.rects[j];
      // enumerate lattice translates t with (R_j + t) near the image box
      Vec2 lo_c = lat_coeffs({is.lo - (rj.s0 + rj.S), iu.lo - (rj.u0 + rj.U)});
      Vec2 hi_c = lat_coeffs({is.hi - rj.s0, iu.hi - rj.u0});
      int m_lo = int(std::floor(std::min(lo_c.x, hi_c.x))) - 2;
      int m_hi = int(std::ceil(std::max(lo_c.x, hi_c.x))) + 2;
      int k_lo = int(std::floor(std::min(lo_c.y, hi_c.y))) - 2;
      int k_hi = int(std::ceil(std::max(lo_c.y, hi_c.y))) + 2;
      int hits = 0;
      for (int m = m_lo; m <= m_hi; ++m)
        for (int k = k_lo; k <= k_hi; ++k) {
          Vec2 t{m * P.lat1.x + k * P.lat2.x, m * P.lat1.y + k * P.lat2.y};
          Interval ts{rj.s0 + t.x, rj.s0 + rj.S + t.x};
          Interval tu{rj.u0 + t.y, rj.u0 + rj.U + t.y};
          if (!(overlaps(is, ts, tol) && overlaps(iu, tu, tol))) continue;
          // positive-area crossing: the Markov conditions must hold
          if (!contains(iu, tu, tol))
            fail(Err::MarkovViolation,
                 "image of rectangle " + std::to_string(i + 1) +
                     " does not stretch across rectangle " + std::to_string(j + 1) +
                     " in the unstable direction");
          if (!contains(ts, is, tol))
            fail(Err::MarkovViolation,
                 "stable image of rectangle " + std::to_string(i + 1) +
                     " is not contained in rectangle " + std::to_string(j + 1));
          ++hits;
          P.B.rows[i][j] = 1;
          PairCrossing pc;
          pc.j = j;
          pc.t = t;
          P.crossing[i].push_back(pc);
        }
      if (hits > 1) {
        P.warnings.push_back("rectangle pair (" + std::to_string(i + 1) + "," +
                             std::to_string(j + 1) + ") crosses at multiple translates");
        for (auto& pc : P.crossing[i])
          if (pc.j == j) pc.unique = false;
      }
    }
    if (P.crossing[i].empty())
      fail(Err::MarkovViolation,
           "rectangle " + std::to_string(i + 1) + " has no admissible image");
  }

  // sampled audit: interior points must map where the crossing table says
  for (int i = 0; i < n; ++i)
    for (int rep = 0; rep < 200; ++rep) {
      const auto& r = P.rects[i];
      Vec2 su{r.s0 + (0.02 + 0.96 * rng.uniform()) * r.S,
              r.u0 + (0.02 + 0.96 * rng.uniform()) * r.U};
      Vec2 im{ls * su.x, lu * su.y};
      bool found = false;
      for (const auto& pc : P.crossing[i]) {
        const auto& rj = P.rects[pc.j];
        if (im.x >= rj.s0 + pc.t.x - tol && im.x <= rj.s0 + rj.S + pc.t.x + tol &&
            im.y >= rj.u0 + pc.t.y - tol && im.y <= rj.u0 + rj.U + pc.t.y + tol) {
          found = true;
          break;
        }
      }
      if (!found)
        fail(Err::MarkovViolation, "sampled image escapes the crossing table (rectangle " +
                                       std::to_string(i + 1) + ")");
    }

  // fixed point position (warning only; encoding O is then ambiguous)
  try {
    locate(P, TorusPoint{0, 0}, 1e-9);
    P.fixed_point_interior = true;
  } catch (const ErgoError&) {
    P.fixed_point_interior = false;
    P.warnings.push_back("fixed point O lies on a rectangle boundary");
  }
  return P;
}

LocateResult locate(const MarkovPartition& P, const TorusPoint& x, double margin) {
  Vec2 su = to_su(P.T, {x.x, x.y});
  int best = -1;
  double best_cl = -1e300;
  for (int i = 0; i < int(P.rects.size()); ++i) {
    const auto& r = P.rects[i];
    for (auto [kx, ky] : P.member_shifts[i]) {
      Vec2 cand{su.x + kx * P.lat1.x + ky * P.lat2.x, su.y + kx * P.lat1.y + ky * P.lat2.y};
      double cl = std::min(std::min(cand.x - r.s0, r.s0 + r.S - cand.x),
                           std::min(cand.y - r.u0, r.u0 + r.U - cand.y));
      if (cl > best_cl) {
        best_cl = cl;
        best = i;
      }
    }
  }
  if (best < 0 || best_cl < margin)
    fail(Err::BoundaryAmbiguity, "point within " + std::to_string(margin) +
                                     " of the partition boundary");
  return {best + 1, best_cl};
}

Itinerary encode(const MarkovPartition& P, const TorusPoint& x, i64 n_minus, i64 n_plus,
                 double margin) {
  if (n_minus > 0 || n_plus < 0 || n_minus > n_plus)
    fail(Err::BadInput, "window must satisfy n_minus <= 0 <= n_plus");
  Itinerary it;
  it.n_minus = n_minus;
  it.n_plus = n_plus;
  it.w.resize(std::size_t(n_plus - n_minus + 1));
  TorusPoint p = toral_apply(P.T, x, n_minus);
  for (i64 t = n_minus; t <= n_plus; ++t) {
    try {
      it.w[std::size_t(t - n_minus)] = locate(P, p, margin).index;
    } catch (const ErgoError& e) {
      if (e.code() == Err::BoundaryAmbiguity)
        fail(Err::BoundaryAmbiguity, "orbit point at time " + std::to_string(t) +
                                         " is too close to the partition boundary");
      throw;
    }
    if (t < n_plus) p = toral_apply(P.T, p, 1);
  }
  return it;
}

DecodedPoint decode(const MarkovPartition& P, const Itinerary& it) {
  if (it.w.empty()) fail(Err::TooShort, "empty itinerary");
  if (it.n_minus > 0 || it.n_plus < 0 || it.length() != it.n_plus - it.n_minus + 1)
    fail(Err::BadInput, "itinerary window must contain time 0");
  for (int s : it.w)
    if (s < 1 || s > int(P.rects.size())) fail(Err::SymbolOutOfRange, "rectangle index");

  const double ls = P.T.lambda_s, lu = P.T.lambda_u;

  // translate for the consecutive pair (a -> b); EmptyIntersection if the
  // pair is not in the crossing table or ambiguous
  auto pair_translate = [&](int a, int b) -> Vec2 {
    for (const auto& pc : P.crossing[std::size_t(a - 1)])
      if (pc.j == b - 1) {
        if (!pc.unique)
          fail(Err::EmptyIntersection, "ambiguous crossing for pair (" + std::to_string(a) +
                                           "," + std::to_string(b) + ")");
        return pc.t;
      }
    fail(Err::EmptyIntersection, "inadmissible pair (" + std::to_string(a) + "," +
                                     std::to_string(b) + ") in itinerary");
  };

  // Unstable coordinate at time 0: backward substitution from time n_plus.
  // Frame recursion: z_{i+1} = G z_i - t(q_i, q_{i+1}), so
  // u_i = (u_{i+1} + t_u) / lambda_u.
  const auto& r_end = P.rects[std::size_t(it.at(it.n_plus) - 1)];
  Interval u{r_end.u0, r_end.u0 + r_end.U};
  for (i64 i = it.n_plus - 1; i >= 0; --i) {
    Vec2 t = pair_translate(it.at(i), it.at(i + 1));
    Interval shifted{(u.lo + t.y) / lu, (u.hi + t.y) / lu};
    if (lu < 0) std::swap(shifted.lo, shifted.hi);
    const auto& ri = P.rects[std::size_t(it.at(i) - 1)];
    u.lo = std::max(shifted.lo, ri.u0);
    u.hi = std::min(shifted.hi, ri.u0 + ri.U);
    if (u.lo > u.hi + 1e-12)
      fail(Err::EmptyIntersection, "unstable refinement emptied at time " + std::to_string(i));
  }

  // Stable coordinate at time 0: forward substitution from time n_minus:
  // s_{i+1} = lambda_s s_i - t_s.
  const auto& r_begin = P.rects[std::size_t(it.at(it.n_minus) - 1)];
  Interval s{r_begin.s0, r_begin.s0 + r_begin.S};
  for (i64 i = it.n_minus; i < 0; ++i) {
    Vec2 t = pair_translate(it.at(i), it.at(i + 1));
    Interval im{ls * s.lo - t.x, ls * s.hi - t.x};
    if (ls < 0) std::swap(im.lo, im.hi);
    const auto& rj = P.rects[std::size_t(it.at(i + 1) - 1)];
    s.lo = std::max(im.lo, rj.s0);
    s.hi = std::min(im.hi, rj.s0 + rj.S);
    if (s.lo > s.hi + 1e-12)
      fail(Err::EmptyIntersection, "stable refinement emptied at time " + std::to_string(i + 1));
  }

  DecodedPoint out;
  Vec2 su{(s.lo + s.hi) / 2, (u.lo + u.hi) / 2};
  Vec2 xy = from_su(P.T, su);
  out.x = wrap(xy);
  out.err_s = (s.hi - s.lo) / 2;
  out.err_u = (u.hi - u.lo) / 2;
  out.err_bound = std::max(P.S_max * std::pow(std::fabs(ls), double(-it.n_minus)),
                           P.U_max * std::pow(std::fabs(lu), double(-it.n_plus)));
  return out;
}

std::vector<double> rectangle_areas(const MarkovPartition& P) {
  // |e_s ^ e_u| scales (s,u)-area to xy-area
  double wedge = std::fabs(P.T.e_s.x * P.T.e_u.y - P.T.e_s.y * P.T.e_u.x);
  std::vector<double> a;
  for (const auto& r : P.rects) a.push_back(r.S * r.U * wedge);
  return a;
}

}  // namespace ergolab
