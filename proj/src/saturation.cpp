#include "ergolab/saturation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace ergolab {

namespace {

std::string lvl(int k) { return "level " + std::to_string(k); }

void validate_levels(const std::vector<LevelSpec>& levels, int K) {
  if (K < 1) fail(Err::BadInput, "depth must be >= 1");
  if (int(levels.size()) < K) fail(Err::BadInput, "need a LevelSpec per level");
  for (int k = 1; k <= K; ++k) {
    const LevelSpec& L = levels[std::size_t(k) - 1];
    const std::size_t p = L.components.size();
    if (p < 1) fail(Err::BadInput, lvl(k) + ": empty component list");
    if (L.weights.size() != p || L.seg_len.size() != p || L.ring_bridge.size() != p)
      fail(Err::BadInput, lvl(k) + ": component/weight/length/bridge sizes disagree");
    Rat sum(0);
    for (const Rat& a : L.weights) {
      if (!(Rat(0) < a)) fail(Err::BadInput, lvl(k) + ": weights must be positive");
      sum = sum + a;
    }
    if (!(sum == Rat(1))) fail(Err::BadInput, lvl(k) + ": weights must sum to 1 exactly");
    for (i64 n : L.seg_len)
      if (n < 1) fail(Err::BadInput, lvl(k) + ": segment lengths must be >= 1");
    for (i64 s : L.ring_bridge)
      if (s < 1) fail(Err::BadInput, lvl(k) + ": bridge lengths must be >= 1");
    if (k < K && L.up_bridge < 1) fail(Err::BadInput, lvl(k) + ": cross-level bridge must be >= 1");
  }
}

// weights of the metric: |integral gap| / (sup * 2^{i+2}) summed over i
double family_distance(const TestFamily& F, const std::vector<double>& a,
                       const std::vector<double>& b) {
  Kahan acc;
  for (std::size_t i = 0; i < F.fns.size(); ++i)
    acc.add(std::fabs(a[i] - b[i]) / (F.fns[i].sup * std::ldexp(1.0, int(i) + 2)));
  return acc.value();
}

std::vector<double> integral_vector(const TestFamily& F, const Measure& mu) {
  std::vector<double> v(F.fns.size());
  for (std::size_t i = 0; i < F.fns.size(); ++i) v[i] = integrate(F.fns[i], mu);
  return v;
}

}  // namespace

//---------------------------------------------------------------------------
// Schedule.
//---------------------------------------------------------------------------

i64 Schedule::sweep_start(int k, i64 i) const {
  const ScheduleLevel& r = rows[std::size_t(k) - 1];
  if (i < 1 || i > r.T) fail(Err::BadInput, "sweep index out of range");
  return add_i64(r.M, mul_i64(i - 1, r.Y, "sweep offset"), "sweep offset");
}

i64 Schedule::block_start(int k, i64 i, int j) const {
  const ScheduleLevel& r = rows[std::size_t(k) - 1];
  const LevelSpec& L = levels[std::size_t(k) - 1];
  if (j < 1 || j > int(L.components.size())) fail(Err::BadInput, "block index out of range");
  i64 at = sweep_start(k, i);
  for (int jj = 1; jj < j; ++jj) {
    at = add_i64(at,
                 mul_i64(r.seg_count[std::size_t(jj) - 1], L.seg_len[std::size_t(jj) - 1],
                         "block offset"),
                 "block offset");
    at = add_i64(at, L.ring_bridge[std::size_t(jj) - 1], "block offset");
  }
  return at;
}

i64 Schedule::segment_start(int k, i64 i, int j, i64 t) const {
  const ScheduleLevel& r = rows[std::size_t(k) - 1];
  if (t < 1 || t > r.seg_count[std::size_t(j) - 1]) fail(Err::BadInput, "segment index out of range");
  return add_i64(block_start(k, i, j),
                 mul_i64(t - 1, levels[std::size_t(k) - 1].seg_len[std::size_t(j) - 1], "segment offset"),
                 "segment offset");
}

Schedule build_schedule(const std::vector<LevelSpec>& levels, int K) {
  validate_levels(levels, K);
  Schedule sch;
  sch.K = K;
  sch.levels.assign(levels.begin(), levels.begin() + K);

  auto bridge_total = [&](int r) {  // all bridge symbols belonging to level r
    const LevelSpec& L = levels[std::size_t(r) - 1];
    i64 s = 0;
    for (i64 b : L.ring_bridge) s = add_i64(s, b, lvl(r));
    if (r < K) s = add_i64(s, L.up_bridge, lvl(r));
    return s;
  };

  for (int k = 1; k <= K; ++k) {
    const LevelSpec& L = levels[std::size_t(k) - 1];
    ScheduleLevel row;
    row.k = k;
    i64 den_lcm = 1;
    for (std::size_t j = 0; j < L.components.size(); ++j) {
      Rat C = L.weights[j] / Rat(L.seg_len[j]);
      row.C.push_back(C);
      den_lcm = lcm_i64(den_lcm, C.den);
    }
    i64 bridges_through = 0;
    for (int r = 1; r <= std::min(k + 1, K); ++r)
      bridges_through = add_i64(bridges_through, bridge_total(r), lvl(k));
    i64 need = mul_i64(i64(k), bridges_through, lvl(k));
    i64 mult = need <= 0 ? 1 : ceil_div(need, den_lcm);
    if (mult < 1) mult = 1;
    row.N = mul_i64(mult, den_lcm, lvl(k));
    for (i64 b : L.ring_bridge) row.X = add_i64(row.X, b, lvl(k));
    row.Y = add_i64(row.N, row.X, lvl(k));
    // exact integer segment counts; sum-check forced by sum(a_j) = 1
    i64 check = 0;
    for (std::size_t j = 0; j < row.C.size(); ++j) {
      i64 cnt = mul_i64(row.N / row.C[j].den, row.C[j].num, lvl(k));
      row.seg_count.push_back(cnt);
      check = add_i64(check, mul_i64(cnt, L.seg_len[j], lvl(k)), lvl(k));
    }
    if (check != row.N) fail(Err::BadInput, lvl(k) + ": segment counts do not tile N");
    if (row.N < mul_i64(i64(k), row.X, lvl(k)))
      fail(Err::BadInput, lvl(k) + ": bridge share too large for the small-bridge bound");
    sch.rows.push_back(std::move(row));
  }

  // minimal strictly increasing T_k meeting growth and domination
  i64 cum = 0;      // sum_{r<k} Y_r T_r
  i64 cum_up = 0;   // sum_{r<k} (Y_r T_r + up_r)
  for (int k = 1; k <= K; ++k) {
    ScheduleLevel& row = sch.rows[std::size_t(k) - 1];
    i64 T = k == 1 ? 1 : add_i64(sch.rows[std::size_t(k) - 2].T, 1, lvl(k));
    if (k >= 2) {
      // domination: Y_k T_k >= k * sum_{r<k} (Y_r T_r + up_r)
      i64 need = mul_i64(i64(k), cum_up, lvl(k));
      T = std::max(T, ceil_div(need, row.Y));
    }
    if (k < K) {
      // growth: sum_{r<=k} Y_r T_r >= (k+1) * Y_{k+1}
      i64 need = mul_i64(i64(k) + 1, sch.rows[std::size_t(k)].Y, lvl(k));
      if (need > cum) T = std::max(T, ceil_div(need - cum, row.Y));
    }
    row.T = T;
    i64 yt = mul_i64(row.Y, row.T, lvl(k));
    cum = add_i64(cum, yt, lvl(k));
    cum_up = add_i64(cum_up, add_i64(yt, k < K ? levels[std::size_t(k) - 1].up_bridge : 0, lvl(k)),
                     lvl(k));
  }

  i64 M = 0;
  for (int k = 1; k <= K; ++k) {
    ScheduleLevel& row = sch.rows[std::size_t(k) - 1];
    row.M = M;
    M = add_i64(M, mul_i64(row.T, row.Y, lvl(k)), lvl(k));
    if (k < K) M = add_i64(M, levels[std::size_t(k) - 1].up_bridge, lvl(k));
  }
  sch.total_len = M;
  return sch;
}

//---------------------------------------------------------------------------
// Rational approximation.
//---------------------------------------------------------------------------

RationalApprox rational_approximation(const Measure& mu, int k,
                                      const std::vector<MarkovMeasure>& candidates,
                                      const TestFamily& F, i64 den_bound,
                                      const std::vector<double>* candidate_entropy,
                                      double mu_entropy) {
  if (candidates.empty()) fail(Err::BadInput, "no candidates supplied");
  if (k < 1 || den_bound < 1) fail(Err::BadInput, "bad precision/denominator controls");
  if (candidate_entropy && candidate_entropy->size() != candidates.size())
    fail(Err::BadInput, "entropy list size mismatch");
  const std::size_t c = candidates.size();
  std::vector<std::vector<double>> I(c);
  for (std::size_t j = 0; j < c; ++j) I[j] = integral_vector(F, *measure_from_markov(candidates[j]));
  std::vector<double> I0 = integral_vector(F, mu);

  const double target = 1.0 / k;
  double best = 2.0;
  std::vector<i64> combo(c, 0), found;
  // compositions of q into c parts, first part largest-first for determinism
  std::function<bool(std::size_t, i64)> scan = [&](std::size_t j, i64 left) -> bool {
    if (j + 1 == c) {
      combo[j] = left;
      i64 q = 0;
      for (i64 v : combo) q += v;
      std::vector<double> mix(F.fns.size(), 0.0);
      for (std::size_t jj = 0; jj < c; ++jj) {
        if (combo[jj] == 0) continue;
        double w = double(combo[jj]) / double(q);
        for (std::size_t i = 0; i < mix.size(); ++i) mix[i] += w * I[jj][i];
      }
      double d = family_distance(F, mix, I0);
      if (d < best) best = d;
      if (d < target) {
        found = combo;
        return true;
      }
      return false;
    }
    for (i64 v = left; v >= 0; --v) {
      combo[j] = v;
      if (scan(j + 1, left - v)) return true;
    }
    return false;
  };

  for (i64 q = 1; q <= den_bound && found.empty(); ++q) {
    // crude guard against combinatorial blow-up on large candidate lists
    double combos = 1;
    for (std::size_t j = 1; j < c; ++j) combos *= double(q + j) / double(j);
    if (combos > 2e7) fail(Err::BadInput, "candidate grid too large to enumerate");
    scan(0, q);
  }
  if (found.empty())
    fail(Err::NoFeasibleCombination,
         "no rational combination within 1/k; best distance " + std::to_string(best));

  RationalApprox out;
  i64 q = 0;
  for (i64 v : found) q += v;
  Kahan hmix;
  for (std::size_t j = 0; j < c; ++j)
    if (found[j] > 0) {
      out.chosen.push_back(j);
      out.weights.emplace_back(found[j], q);
      if (candidate_entropy) hmix.add((double(found[j]) / double(q)) * (*candidate_entropy)[j]);
    }
  // report the achieved distance for the winning combination
  std::vector<double> mix(F.fns.size(), 0.0);
  for (std::size_t idx = 0; idx < out.chosen.size(); ++idx)
    for (std::size_t i = 0; i < mix.size(); ++i)
      mix[i] += out.weights[idx].value() * I[out.chosen[idx]][i];
  out.dist = family_distance(F, mix, I0);
  if (candidate_entropy) out.entropy_gap = std::fabs(mu_entropy - hmix.value());
  return out;
}

//---------------------------------------------------------------------------
// Segment pools.
//---------------------------------------------------------------------------

SegmentPool build_segment_pool(const MarkovMeasure& m, const TestFamily& F, i64 n, int k,
                               int pool_size, std::uint64_t seed, double accept_floor,
                               int anchor) {
  if (n < 1 || k < 1 || pool_size < 1) fail(Err::BadInput, "bad pool parameters");
  const int l = m.B.size;
  if (anchor == 0) {
    anchor = 1;
    for (int i = 1; i < l; ++i)
      if (m.p[std::size_t(i)] > m.p[std::size_t(anchor) - 1]) anchor = i + 1;
  }
  if (anchor < 1 || anchor > l) fail(Err::SymbolOutOfRange, "anchor symbol out of range");
  if (!(m.p[std::size_t(anchor) - 1] > 0)) fail(Err::BadInput, "anchor has zero mass");

  SegmentPool pool;
  pool.k = k;
  pool.n = n;
  pool.anchor = anchor;
  MeasurePtr target = measure_from_markov(m);
  Rng rng(seed);
  Word w(std::size_t(n), 0);
  const i64 warmup = std::max<i64>(200, 20LL * pool_size);
  const double limit = 1.0 / k;
  while (int(pool.words.size()) < pool_size) {
    ++pool.attempts;
    if (pool.attempts > warmup) {
      double rate = double(pool.words.size()) / double(pool.attempts);
      if (rate < accept_floor)
        fail(Err::AcceptanceTooLow, "pool acceptance " + std::to_string(rate) +
                                        " under floor after " + std::to_string(pool.attempts) +
                                        " attempts");
    }
    int cur = anchor - 1;
    w[0] = anchor;
    for (i64 t = 1; t < n; ++t) {
      cur = rng.discrete(m.P[std::size_t(cur)]);
      w[std::size_t(t)] = cur + 1;
    }
    if (!m.B.at(w[std::size_t(n) - 1] - 1, anchor - 1)) continue;
    if (weakstar_distance(F, *measure_from_word(w, n), *target) >= limit) continue;
    pool.words.push_back(w);
    pool.end_symbol.push_back(w[std::size_t(n) - 1]);
  }
  pool.acceptance = double(pool.words.size()) / double(pool.attempts);
  return pool;
}

//---------------------------------------------------------------------------
// Assembly.
//---------------------------------------------------------------------------

Assembly assemble_symbolic(const Schedule& sch, const std::vector<std::vector<SegmentPool>>& pools,
                           const TransitionMatrix& B) {
  if (int(pools.size()) != sch.K) fail(Err::BadInput, "need one pool row per level");
  for (int k = 1; k <= sch.K; ++k) {
    const LevelSpec& L = sch.levels[std::size_t(k) - 1];
    if (pools[std::size_t(k) - 1].size() != L.components.size())
      fail(Err::BadInput, lvl(k) + ": need one pool per component");
    for (std::size_t j = 0; j < L.components.size(); ++j) {
      const SegmentPool& p = pools[std::size_t(k) - 1][j];
      if (p.words.empty()) fail(Err::BadInput, lvl(k) + ": empty pool");
      if (p.n != L.seg_len[j]) fail(Err::BadInput, lvl(k) + ": pool segment length mismatch");
    }
  }

  Assembly out;
  out.word.reserve(std::size_t(sch.total_len));
  std::vector<std::vector<std::size_t>> next_draw(pools.size());
  for (std::size_t k = 0; k < pools.size(); ++k) next_draw[k].assign(pools[k].size(), 0);

  auto append_bridge = [&](int from_sym, int to_sym, i64 s) {
    Word b = bridge_word(B, from_sym, to_sym, s);
    out.word.insert(out.word.end(), b.begin(), b.end());
    out.bridge_symbols += s;
  };

  for (int k = 1; k <= sch.K; ++k) {
    const LevelSpec& L = sch.levels[std::size_t(k) - 1];
    const ScheduleLevel& row = sch.rows[std::size_t(k) - 1];
    const int p = int(L.components.size());
    for (i64 i = 1; i <= row.T; ++i) {
      for (int j = 1; j <= p; ++j) {
        const SegmentPool& pl = pools[std::size_t(k) - 1][std::size_t(j) - 1];
        for (i64 t = 1; t <= row.seg_count[std::size_t(j) - 1]; ++t) {
          if (i64(out.word.size()) != sch.segment_start(k, i, j, t))
            fail(Err::BadInput, "assembly drifted off schedule at " + lvl(k));
          std::size_t& ctr = next_draw[std::size_t(k) - 1][std::size_t(j) - 1];
          const Word& seg = pl.words[ctr % pl.words.size()];
          ++ctr;
          out.segments.push_back({k, i, j, t, i64(out.word.size()), i64(seg.size())});
          out.word.insert(out.word.end(), seg.begin(), seg.end());
        }
        // ring bridge to the next block (wrapping to block 1)
        int next_anchor = pools[std::size_t(k) - 1][std::size_t(j % p)].anchor;
        append_bridge(out.word.back(), next_anchor, L.ring_bridge[std::size_t(j) - 1]);
      }
    }
    if (k < sch.K)
      append_bridge(out.word.back(), pools[std::size_t(k)][0].anchor, L.up_bridge);
  }
  if (i64(out.word.size()) != sch.total_len)
    fail(Err::BadInput, "assembled length disagrees with the schedule");
  return out;
}

//---------------------------------------------------------------------------
// Tracking verification.
//---------------------------------------------------------------------------

TrackingReport verify_tracking(const Word& w, const Schedule& sch,
                               const std::vector<MeasurePtr>& level_targets,
                               const TestFamily& F) {
  if (F.space != SpaceKind::Shift) fail(Err::SpaceMismatch, "tracking needs a shift family");
  if (int(level_targets.size()) != sch.K) fail(Err::BadInput, "need one target per level");
  if (i64(w.size()) < sch.total_len) fail(Err::TooShort, "word shorter than the schedule");

  const std::size_t nf = F.fns.size();
  const i64 len = i64(w.size());
  // per-function prefix sums of the indicator along the word
  std::vector<std::vector<double>> S(nf, std::vector<double>(std::size_t(len) + 1, 0.0));
  for (std::size_t i = 0; i < nf; ++i) {
    const Word& cyl = F.fns[i].cyl;
    const i64 L = i64(cyl.size());
    std::vector<double>& row = S[i];
    for (i64 t = 0; t < len; ++t) {
      double hit = 0.0;
      if (t + L <= len) {
        hit = 1.0;
        for (i64 a = 0; a < L; ++a)
          if (w[std::size_t(t + a)] != cyl[std::size_t(a)]) {
            hit = 0.0;
            break;
          }
      }
      row[std::size_t(t) + 1] = row[std::size_t(t)] + hit;
    }
  }
  auto emp = [&](i64 at, i64 n, std::vector<double>& out_v) {
    for (std::size_t i = 0; i < nf; ++i)
      out_v[i] = (S[i][std::size_t(at + n)] - S[i][std::size_t(at)]) / double(n);
  };

  std::vector<std::vector<double>> tgt(level_targets.size());
  for (std::size_t k = 0; k < level_targets.size(); ++k)
    tgt[k] = integral_vector(F, *level_targets[k]);

  TrackingReport rep;
  auto push_row = [&](Checkpoint cp) {
    cp.pass = cp.D <= cp.threshold;
    rep.all_pass = rep.all_pass && cp.pass;
    rep.worst_margin = std::min(rep.worst_margin, cp.threshold - cp.D);
    rep.rows.push_back(std::move(cp));
  };

  std::vector<double> ev(nf), mixv(nf);
  for (int k = 1; k <= sch.K; ++k) {
    const ScheduleLevel& row = sch.rows[std::size_t(k) - 1];
    const std::vector<double>& mk = tgt[std::size_t(k) - 1];
    for (i64 i = 1; i <= row.T; ++i) {
      i64 at = sch.sweep_start(k, i);
      emp(at, row.Y, ev);
      push_row({"sweep", k, i, row.Y, at, family_distance(F, ev, mk), 6.0 / k, true});
    }
    i64 level_end = k < sch.K ? sch.rows[std::size_t(k)].M : sch.total_len;
    emp(0, level_end, ev);
    push_row({"level_end", k, 0, level_end, 0, family_distance(F, ev, mk), 8.0 / k, true});

    // sup over n in (M_k, M_{k+1}] of the distance to the path from the
    // previous level's target to this one's (21-point grid)
    const std::vector<double>& prev = tgt[std::size_t(k > 1 ? k - 2 : 0)];
    double sup = 0;
    i64 sup_at = row.M + 1;
    for (i64 n = row.M + 1; n <= level_end; ++n) {
      emp(0, n, ev);
      double dmin = 2.0;
      for (int g = 0; g <= 20; ++g) {
        double s = g / 20.0;
        for (std::size_t i = 0; i < nf; ++i) mixv[i] = (1.0 - s) * prev[i] + s * mk[i];
        dmin = std::min(dmin, family_distance(F, ev, mixv));
        if (k == 1) break;  // single target: the path degenerates
      }
      if (dmin > sup) {
        sup = dmin;
        sup_at = n;
      }
    }
    push_row({"path_sup", k, 0, sup_at, 0, sup, 15.0 / k, true});
  }
  return rep;
}

//---------------------------------------------------------------------------
// Certificate and covering estimates.
//---------------------------------------------------------------------------

double certificate_closed_form(int k, double h) {
  if (k < 1) fail(Err::BadInput, "level must be >= 1");
  Rat A(mul_i64(k - 1, k - 1, "certificate"), mul_i64(k, k, "certificate"));
  Rat B = A * Rat(5, k);  // A*(1/k) + A*(4/k)
  return A.value() * h - B.value();
}

std::vector<CertificateRow> entropy_lower_certificate(const Schedule& sch,
                                                      const std::vector<std::vector<double>>& h) {
  if (int(h.size()) != sch.K) fail(Err::BadInput, "need one entropy list per level");
  std::vector<CertificateRow> out;
  for (int k = 1; k <= sch.K; ++k) {
    const LevelSpec& L = sch.levels[std::size_t(k) - 1];
    const ScheduleLevel& row = sch.rows[std::size_t(k) - 1];
    const std::vector<double>& hk = h[std::size_t(k) - 1];
    if (hk.size() != L.components.size()) fail(Err::BadInput, lvl(k) + ": entropy list size");
    for (double v : hk)
      if (v < 0) fail(Err::BadInput, lvl(k) + ": negative entropy");
    CertificateRow r;
    r.k = k;
    Kahan H;
    for (std::size_t j = 0; j < hk.size(); ++j) H.add(L.weights[j].value() * hk[j]);
    Rat A(mul_i64(k - 1, k - 1, "certificate"), mul_i64(k, k, "certificate"));
    r.closed_form = A.value() * H.value() - (A * Rat(5, k)).value();
    Kahan raw;
    for (std::size_t j = 0; j < hk.size(); ++j) {
      i64 sym = mul_i64(row.seg_count[j], L.seg_len[j], "certificate");
      Rat coeff = Rat(sym, row.Y) * Rat(k - 1, k);
      raw.add(coeff.value() * (hk[j] - 4.0 / k));
    }
    r.raw_count = raw.value();
    r.informative = r.closed_form > 0;
    out.push_back(r);
  }
  return out;
}

KatokEntropyEstimate katok_entropy_symbolic(const MarkovMeasure& m, int n, double eps,
                                            double delta, int sample_size, std::uint64_t seed,
                                            i64 budget) {
  if (n < 1 || sample_size < 1) fail(Err::BadInput, "bad sampling parameters");
  if (!(eps > 0) || !(delta >= 0 && delta < 1)) fail(Err::BadInput, "bad eps/delta");
  const int mwin = eps >= 1.0 ? 0 : int(std::ceil(-std::log2(eps) - 1e-12));
  const i64 W = i64(n) + mwin;
  if (mul_i64(W, sample_size, "entropy budget") > budget)
    fail(Err::BudgetExceeded, "window * samples exceeds the budget");

  Rng rng(seed);
  std::map<Word, i64> classes;
  Word w(std::size_t(W), 0);
  for (int s = 0; s < sample_size; ++s) {
    int cur = rng.discrete(m.p);
    w[0] = cur + 1;
    for (i64 t = 1; t < W; ++t) {
      cur = rng.discrete(m.P[std::size_t(cur)]);
      w[std::size_t(t)] = cur + 1;
    }
    ++classes[w];
  }
  // heaviest classes first (ties: lexicographically smaller word first)
  std::vector<std::pair<i64, const Word*>> order;
  order.reserve(classes.size());
  for (const auto& [word, cnt] : classes) order.emplace_back(cnt, &word);
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });

  KatokEntropyEstimate est;
  est.window = W;
  const i64 target = i64(std::ceil((1.0 - delta) * sample_size - 1e-12));
  i64 mass = 0;
  std::map<Word, char> kept_prefixes;  // classes shortened by one symbol
  for (const auto& [cnt, wp] : order) {
    if (mass >= target) break;
    mass += cnt;
    ++est.cover_count;
    if (mwin >= 1) kept_prefixes[Word(wp->begin(), wp->end() - 1)] = 1;
  }
  est.kept_mass = double(mass) / sample_size;
  est.sep_count = est.cover_count;  // kept classes are pairwise eps-separated
  est.sep2_count = mwin >= 1 ? i64(kept_prefixes.size()) : 1;
  est.estimate = std::log(double(std::max<i64>(1, est.cover_count))) / n;
  return est;
}

KatokEntropyEstimate katok_entropy_geometric(const SurfaceMap& f,
                                             const std::function<TorusPoint(Rng&)>& sampler,
                                             int n, double eps, double delta, int sample_size,
                                             std::uint64_t seed, i64 budget) {
  if (n < 1 || sample_size < 1) fail(Err::BadInput, "bad sampling parameters");
  if (!(eps > 0) || !(delta >= 0 && delta < 1)) fail(Err::BadInput, "bad eps/delta");
  if (mul_i64(i64(n), sample_size, "entropy budget") > budget)
    fail(Err::BudgetExceeded, "orbit symbols exceed the budget");

  Rng rng(seed);
  const std::size_t S = std::size_t(sample_size);
  std::vector<std::vector<TorusPoint>> orbit(S, std::vector<TorusPoint>(std::size_t(n)));
  for (std::size_t s = 0; s < S; ++s) {
    TorusPoint p = sampler(rng);
    for (int t = 0; t < n; ++t) {
      orbit[s][std::size_t(t)] = p;
      p = f.step(p);
    }
  }
  auto dist_n = [&](std::size_t a, std::size_t b) {
    double d = 0;
    for (int t = 0; t < n; ++t)
      d = std::max(d, torus_dist(orbit[a][std::size_t(t)], orbit[b][std::size_t(t)]));
    return d;
  };

  // greedy separated sweep; stop adding centers once 1-delta of the sample
  // is within eps of one of them
  KatokEntropyEstimate est;
  est.window = n;
  std::vector<std::size_t> centers;
  std::vector<char> covered(S, 0);
  std::size_t covered_cnt = 0;
  const std::size_t target = std::size_t(std::ceil((1.0 - delta) * sample_size - 1e-12));
  for (std::size_t s = 0; s < S && covered_cnt < target; ++s) {
    if (covered[s]) continue;
    centers.push_back(s);
    for (std::size_t b = 0; b < S; ++b)
      if (!covered[b] && dist_n(s, b) <= eps) {
        covered[b] = 1;
        ++covered_cnt;
      }
  }
  est.cover_count = i64(centers.size());
  est.kept_mass = double(covered_cnt) / sample_size;

  // separated companions over the covered portion
  std::vector<std::size_t> sep1, sep2;
  for (std::size_t s = 0; s < S; ++s) {
    if (!covered[s]) continue;
    bool far1 = true, far2 = true;
    for (std::size_t c : sep1)
      if (dist_n(s, c) < eps) {
        far1 = false;
        break;
      }
    if (far1) sep1.push_back(s);
    for (std::size_t c : sep2)
      if (dist_n(s, c) < 2.0 * eps) {
        far2 = false;
        break;
      }
    if (far2) sep2.push_back(s);
  }
  est.sep_count = i64(sep1.size());
  est.sep2_count = i64(sep2.size());
  est.estimate = std::log(double(std::max<i64>(1, est.cover_count))) / n;
  return est;
}

}  // namespace ergolab
