#include "ergolab/weakstar.hpp"

#include <algorithm>
#include <cmath>

namespace ergolab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

int TestFamily::max_cylinder_len() const {
  int L = 0;
  for (const auto& f : fns) L = std::max(L, int(f.cyl.size()));
  return L;
}

TestFamily build_test_family_torus(int imax) {
  if (imax < 1) fail(Err::BadInput, "imax must be >= 1");
  TestFamily F;
  F.space = SpaceKind::Torus2;
  F.imax = imax;
  F.fns.push_back(TestFunction{});  // constant 1
  // half-plane frequencies (m1 > 0) or (m1 == 0 && m2 > 0), by |m1|+|m2|
  // then lexicographic; each contributes cos then sin.
  for (int l1 = 1; int(F.fns.size()) < imax; ++l1) {
    for (int m1 = 0; m1 <= l1 && int(F.fns.size()) < imax; ++m1) {
      std::vector<int> m2s;
      int r = l1 - m1;
      if (m1 == 0) {
        m2s = {r};  // only the positive representative
      } else if (r == 0) {
        m2s = {0};
      } else {
        m2s = {-r, r};
      }
      for (int m2 : m2s) {
        for (int trig = 1; trig <= 2 && int(F.fns.size()) < imax; ++trig) {
          TestFunction f;
          f.trig = trig;
          f.m1 = m1;
          f.m2 = m2;
          f.sup = 1.0;
          // modulus constant w.r.t. the max-metric on minimal lifts:
          // |phi(x)-phi(y)| <= 2 pi (|m1|+|m2|) d_inf(x,y)
          f.lip = kTwoPi * (std::abs(m1) + std::abs(m2));
          F.fns.push_back(f);
        }
      }
    }
  }
  return F;
}

TestFamily build_test_family_shift(const TransitionMatrix& B, int imax) {
  if (imax < 1) fail(Err::BadInput, "imax must be >= 1");
  validate_transition_matrix(B);
  TestFamily F;
  F.space = SpaceKind::Shift;
  F.B = B;
  F.imax = imax;
  // admissible words by length, lexicographic within each length
  std::vector<Word> cur;
  for (int s = 1; s <= B.size; ++s) cur.push_back({s});
  while (int(F.fns.size()) < imax) {
    for (const auto& w : cur) {
      if (int(F.fns.size()) >= imax) break;
      TestFunction f;
      f.trig = -1;
      f.cyl = w;
      f.sup = 1.0;
      // two sequences at distance < 2^{-(L-1)} agree on coordinates
      // 0..L-1, so the indicator of a length-L cylinder has modulus
      // constant 2^{L-1}.
      f.lip = std::ldexp(1.0, int(w.size()) - 1);
      F.fns.push_back(f);
    }
    std::vector<Word> next;
    for (const auto& w : cur)
      for (int s = 1; s <= B.size; ++s)
        if (B.at(w.back() - 1, s - 1)) {
          Word v = w;
          v.push_back(s);
          next.push_back(std::move(v));
        }
    if (next.empty()) fail(Err::BadInput, "no admissible words (zero row reached)");
    cur = std::move(next);
  }
  return F;
}

MeasurePtr measure_from_points(std::vector<TorusPoint> pts) {
  if (pts.empty()) fail(Err::TooShort, "empirical measure needs at least one point");
  auto m = std::make_shared<Measure>();
  m->space = SpaceKind::Torus2;
  m->emp_torus = EmpiricalTorus{std::move(pts)};
  return m;
}

MeasurePtr measure_from_word(Word w, i64 n, i64 offset) {
  if (n < 1) fail(Err::TooShort, "empirical measure needs at least one point");
  if (offset < 0 || offset + n > i64(w.size()))
    fail(Err::BadInput, "word too short for the requested orbit segment");
  auto m = std::make_shared<Measure>();
  m->space = SpaceKind::Shift;
  m->emp_word = EmpiricalWord{std::move(w), offset, n};
  return m;
}

MeasurePtr measure_from_markov(MarkovMeasure mm) {
  auto m = std::make_shared<Measure>();
  m->space = SpaceKind::Shift;
  m->markov = std::move(mm);
  return m;
}

MeasurePtr measure_mix(std::vector<std::pair<double, MeasurePtr>> parts) {
  if (parts.empty()) fail(Err::BadInput, "empty combination");
  double tot = 0;
  SpaceKind space = parts.front().second->space;
  for (auto& [w, mp] : parts) {
    if (!(w > 0)) fail(Err::BadInput, "combination weights must be positive");
    if (mp->space != space) fail(Err::SpaceMismatch, "mixed-space combination");
    tot += w;
  }
  if (std::fabs(tot - 1.0) > 1e-12) fail(Err::BadInput, "combination weights must sum to 1");
  auto m = std::make_shared<Measure>();
  m->space = space;
  m->mix = std::move(parts);
  return m;
}

namespace {

double eval_trig(const TestFunction& fn, const TorusPoint& p) {
  if (fn.trig == 0) return 1.0;
  double th = kTwoPi * (fn.m1 * p.x + fn.m2 * p.y);
  return fn.trig == 1 ? std::cos(th) : std::sin(th);
}

// indicator of fn.cyl at sigma^pos(w); windows off the end count as mismatch
double eval_cyl(const TestFunction& fn, const Word& w, i64 pos) {
  if (pos + i64(fn.cyl.size()) > i64(w.size())) return 0.0;
  for (std::size_t k = 0; k < fn.cyl.size(); ++k)
    if (w[std::size_t(pos) + k] != fn.cyl[k]) return 0.0;
  return 1.0;
}

}  // namespace

double integrate(const TestFunction& fn, const Measure& mu) {
  const bool fn_shift = fn.trig < 0;
  if ((fn_shift && mu.space != SpaceKind::Shift) || (!fn_shift && mu.space != SpaceKind::Torus2))
    if (fn.trig != 0)  // the constant integrates to 1 on any space
      fail(Err::SpaceMismatch, "test function space does not match the measure");

  if (!mu.mix.empty()) {
    Kahan acc;
    for (const auto& [w, part] : mu.mix) acc.add(w * integrate(fn, *part));
    return acc.value();
  }
  if (mu.emp_torus) {
    Kahan acc;
    for (const auto& p : mu.emp_torus->pts) acc.add(eval_trig(fn, p));
    return acc.value() / double(mu.emp_torus->pts.size());
  }
  if (mu.emp_word) {
    if (fn.trig == 0) return 1.0;
    const auto& ew = *mu.emp_word;
    double cnt = 0;
    for (i64 i = 0; i < ew.n; ++i) cnt += eval_cyl(fn, ew.w, ew.offset + i);
    return cnt / double(ew.n);
  }
  if (mu.markov) {
    if (fn.trig == 0) return 1.0;
    return cylinder_measure(*mu.markov, fn.cyl);
  }
  fail(Err::BadInput, "empty measure handle");
}

double weakstar_distance(const TestFamily& F, const Measure& mu, const Measure& nu) {
  bool mu_ok = (F.space == mu.space);
  bool nu_ok = (F.space == nu.space);
  if (!mu_ok || !nu_ok) fail(Err::SpaceMismatch, "measure space does not match the family");
  Kahan acc;
  for (std::size_t i = 0; i < F.fns.size(); ++i) {
    double d = std::fabs(integrate(F.fns[i], mu) - integrate(F.fns[i], nu));
    acc.add(d / (std::ldexp(1.0, int(i) + 2) * F.fns[i].sup));
    // weight 2^{-(i+2)}: test functions are 1-indexed (phi_1 has weight 1/4)
  }
  return acc.value();
}

double continuity_radius(const TestFamily& F, int k) {
  if (k < 1) fail(Err::BadInput, "k must be >= 1");
  if (k > F.imax) fail(Err::BadInput, "k exceeds imax");
  double b = std::numeric_limits<double>::infinity();
  for (int j = 0; j < k; ++j)
    if (F.fns[j].lip > 0) b = std::min(b, F.fns[j].sup / (double(k) * F.fns[j].lip));
  return b;
}

}  // namespace ergolab
