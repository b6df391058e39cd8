#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"

#include "ergolab/saturation.hpp"

using namespace ergolab;

namespace {

const double kLogPhi = 0.48121182505960347;
const double kLog2 = 0.6931471805599453;

TransitionMatrix golden() {
  TransitionMatrix B;
  B.size = 2;
  B.rows = {{1, 1}, {1, 0}};
  return B;
}

MarkovMeasure parry_g() { return parry_measure(golden()); }

// a second stationary chain on the golden graph (loop probability 0.55)
MarkovMeasure perturbed_g() {
  std::vector<std::vector<double>> P = {{0.55, 0.45}, {1.0, 0.0}};
  std::vector<double> p = {1.0 / 1.45, 0.45 / 1.45};
  return make_markov_measure(golden(), std::move(p), std::move(P));
}

// three levels, two components each, segment length 200k at level k
std::vector<LevelSpec> levels3() {
  std::vector<LevelSpec> ls;
  for (int k = 1; k <= 3; ++k) {
    LevelSpec L;
    L.k = k;
    L.components = {parry_g(), perturbed_g()};
    L.weights = {Rat(1, 2), Rat(1, 2)};
    L.seg_len = {200 * k, 200 * k};
    L.ring_bridge = {2, 2};
    L.up_bridge = 2;
    ls.push_back(L);
  }
  return ls;
}

MeasurePtr half_half_mix() {
  return measure_mix({{0.5, measure_from_markov(parry_g())},
                      {0.5, measure_from_markov(perturbed_g())}});
}

}  // namespace

TEST_CASE("schedule: three-level worked example, every integer frozen") {
  Schedule sch = build_schedule(levels3(), 3);
  REQUIRE(sch.K == 3);
  REQUIRE(sch.rows.size() == 3);

  const i64 N[3] = {400, 800, 1200};
  const i64 Y[3] = {404, 804, 1204};
  const i64 T[3] = {4, 5, 15};
  const i64 M[3] = {0, 1618, 5640};
  for (int k = 1; k <= 3; ++k) {
    const ScheduleLevel& r = sch.rows[std::size_t(k) - 1];
    CHECK(r.k == k);
    CHECK(r.N == N[k - 1]);
    CHECK(r.X == 4);
    CHECK(r.Y == Y[k - 1]);
    CHECK(r.T == T[k - 1]);
    CHECK(r.M == M[k - 1]);
    REQUIRE(r.C.size() == 2);
    CHECK(r.C[0] == Rat(1, 400 * k));
    CHECK(r.C[1] == Rat(1, 400 * k));
    REQUIRE(r.seg_count.size() == 2);
    CHECK(r.seg_count[0] == 1);
    CHECK(r.seg_count[1] == 1);
  }
  CHECK(sch.total_len == 23700);

  // offset helpers
  CHECK(sch.sweep_start(1, 1) == 0);
  CHECK(sch.sweep_start(1, 4) == 3 * 404);
  CHECK(sch.sweep_start(2, 1) == 1618);
  CHECK(sch.sweep_start(3, 15) == 5640 + 14 * 1204);
  CHECK(sch.block_start(1, 1, 1) == 0);
  CHECK(sch.block_start(1, 1, 2) == 202);  // segment 200 + ring bridge 2
  CHECK(sch.segment_start(1, 1, 2, 1) == 202);
  CHECK(sch.segment_start(3, 15, 2, 1) == 5640 + 14 * 1204 + 602);
  CHECK_THROWS_AS(sch.sweep_start(1, 5), ErgoError);
  CHECK_THROWS_AS(sch.segment_start(1, 1, 2, 2), ErgoError);
  CHECK_THROWS_AS(sch.block_start(1, 1, 3), ErgoError);
}

TEST_CASE("schedule validation") {
  auto ls = levels3();
  ls[1].weights = {Rat(1, 2), Rat(1, 3)};
  CHECK_THROWS_AS(build_schedule(ls, 3), ErgoError);

  ls = levels3();
  ls[0].seg_len = {0, 200};
  CHECK_THROWS_AS(build_schedule(ls, 3), ErgoError);

  ls = levels3();
  ls[2].ring_bridge = {2};  // size disagrees with the component count
  CHECK_THROWS_AS(build_schedule(ls, 3), ErgoError);

  CHECK_THROWS_AS(build_schedule(levels3(), 4), ErgoError);  // more depth than levels

  // astronomically long segments overflow the offset arithmetic loudly
  std::vector<LevelSpec> huge;
  for (int k = 1; k <= 2; ++k) {
    LevelSpec L;
    L.k = k;
    L.components = {parry_g()};
    L.weights = {Rat(1)};
    L.seg_len = {i64(3000000000000000000LL)};
    L.ring_bridge = {1};
    L.up_bridge = 1;
    huge.push_back(L);
  }
  try {
    build_schedule(huge, 2);
    FAIL("expected overflow");
  } catch (const ErgoError& e) {
    CHECK(e.code() == Err::DepthOverflow);
  }
}

TEST_CASE("rational approximation: exact hit, exact mixture, infeasible grid") {
  TestFamily F = build_test_family_shift(golden(), 32);
  MarkovMeasure P = parry_g(), Q = perturbed_g();
  std::vector<MarkovMeasure> cands = {P, Q};

  // the target itself is a candidate: weight 1 on it, distance 0
  RationalApprox hit = rational_approximation(*measure_from_markov(P), 3, cands, F, 4);
  REQUIRE(hit.chosen.size() == 1);
  CHECK(hit.chosen[0] == 0);
  CHECK(hit.weights[0] == Rat(1));
  CHECK(hit.dist < 1e-12);

  // a genuine half/half mixture is found exactly once singles are too coarse
  MeasurePtr mix = half_half_mix();
  double d_single = weakstar_distance(F, *mix, *measure_from_markov(P));
  REQUIRE(d_single > 0);
  int k = int(std::ceil(1.0 / d_single)) + 1;  // now 1/k < d_single
  std::vector<double> hs = {markov_entropy(P), markov_entropy(Q)};
  double h_mix = 0.5 * hs[0] + 0.5 * hs[1];
  RationalApprox two = rational_approximation(*mix, k, cands, F, 4, &hs, h_mix);
  REQUIRE(two.chosen.size() == 2);
  CHECK(two.weights[0] == Rat(1, 2));
  CHECK(two.weights[1] == Rat(1, 2));
  CHECK(two.dist < 1e-12);
  REQUIRE(two.entropy_gap.has_value());
  CHECK(*two.entropy_gap < 1e-12);

  // only the wrong candidate: no grid point can reach 1/k
  std::vector<MarkovMeasure> only_q = {Q};
  try {
    rational_approximation(*measure_from_markov(P), k, only_q, F, 6);
    FAIL("expected an infeasible grid");
  } catch (const ErgoError& e) {
    CHECK(e.code() == Err::NoFeasibleCombination);
  }
}

TEST_CASE("segment pools: anchored, junction-closed, measure-typical") {
  TestFamily F = build_test_family_shift(golden(), 64);
  MarkovMeasure P = parry_g();
  SegmentPool pool = build_segment_pool(P, F, 400, 3, 6, 11);
  CHECK(pool.anchor == 1);  // the heavier state
  CHECK(pool.n == 400);
  REQUIRE(pool.words.size() == 6);
  MeasurePtr target = measure_from_markov(P);
  for (std::size_t i = 0; i < pool.words.size(); ++i) {
    const Word& w = pool.words[i];
    REQUIRE(w.size() == 400);
    CHECK(w.front() == 1);
    CHECK(word_admissible(golden(), w));
    CHECK(pool.end_symbol[i] == w.back());
    CHECK(golden().at(w.back() - 1, 0) == 1);
    CHECK(weakstar_distance(F, *measure_from_word(w, 400), *target) < 1.0 / 3);
  }
  CHECK(pool.acceptance > 0);
  CHECK(pool.attempts >= 6);

  // same seed, same words
  SegmentPool again = build_segment_pool(P, F, 400, 3, 6, 11);
  CHECK(again.words == pool.words);

  // explicit anchor
  SegmentPool p2 = build_segment_pool(P, F, 300, 2, 3, 12, 1e-4, 2);
  for (const Word& w : p2.words) CHECK(w.front() == 2);

  // an impossible precision target dies with a diagnosis, not a hang:
  // length-400 empirical cylinder masses are multiples of 1/400, so the
  // distance to the Parry measure is bounded below by ~1.4e-4 > 1/10000
  try {
    build_segment_pool(P, F, 400, 10000, 4, 13, 0.5);
    FAIL("expected low acceptance");
  } catch (const ErgoError& e) {
    CHECK(e.code() == Err::AcceptanceTooLow);
  }
}

TEST_CASE("assembly lands every segment on its scheduled offset") {
  Schedule sch = build_schedule(levels3(), 3);
  TestFamily F = build_test_family_shift(golden(), 64);
  MarkovMeasure comp[2] = {parry_g(), perturbed_g()};

  std::vector<std::vector<SegmentPool>> pools;
  for (int k = 1; k <= 3; ++k) {
    std::vector<SegmentPool> row;
    for (int j = 0; j < 2; ++j)
      row.push_back(build_segment_pool(comp[j], F, 200 * k, k, 3, 1000 + 10 * k + j));
    pools.push_back(std::move(row));
  }

  Assembly a = assemble_symbolic(sch, pools, golden());
  CHECK(i64(a.word.size()) == 23700);
  CHECK(word_admissible(golden(), a.word));
  CHECK(a.bridge_symbols == 100);  // 4 ring symbols x 24 sweeps + 2 cross-level bridges
  REQUIRE(a.segments.size() == 48);  // one per block, 4+5+15 sweeps, 2 blocks each

  for (const SegmentPlacement& sp : a.segments) {
    CHECK(sp.pos == sch.segment_start(sp.k, sp.i, sp.j, sp.t));
    CHECK(sp.len == 200 * sp.k);
    CHECK(a.word[std::size_t(sp.pos)] == 1);  // every pool is anchored at 1
  }

  // round-robin draws: sweep i of level k uses pool word (i-1) mod 3
  for (const SegmentPlacement& sp : a.segments) {
    const Word& expect = pools[std::size_t(sp.k) - 1][std::size_t(sp.j) - 1]
                             .words[std::size_t((sp.i - 1) % 3)];
    Word got(a.word.begin() + sp.pos, a.word.begin() + sp.pos + sp.len);
    CHECK(got == expect);
  }

  // pool with the wrong segment length is rejected up front
  auto bad = pools;
  bad[0][0] = build_segment_pool(comp[0], F, 150, 1, 3, 77);
  CHECK_THROWS_AS(assemble_symbolic(sch, bad, golden()), ErgoError);
}

TEST_CASE("tracking verification on an assembled word") {
  Schedule sch = build_schedule(levels3(), 3);
  TestFamily F = build_test_family_shift(golden(), 64);
  MarkovMeasure comp[2] = {parry_g(), perturbed_g()};
  std::vector<std::vector<SegmentPool>> pools;
  for (int k = 1; k <= 3; ++k) {
    std::vector<SegmentPool> row;
    for (int j = 0; j < 2; ++j)
      row.push_back(build_segment_pool(comp[j], F, 200 * k, k, 3, 2000 + 10 * k + j));
    pools.push_back(std::move(row));
  }
  Assembly a = assemble_symbolic(sch, pools, golden());

  std::vector<MeasurePtr> targets = {half_half_mix(), half_half_mix(), half_half_mix()};
  TrackingReport rep = verify_tracking(a.word, sch, targets, F);

  CHECK(rep.all_pass);
  CHECK(rep.worst_margin > 1.0);
  REQUIRE(rep.rows.size() == 24 + 6);  // 4+5+15 sweeps, plus level_end/path_sup per level

  int sweeps = 0, ends = 0, sups = 0;
  for (const Checkpoint& cp : rep.rows) {
    CHECK(cp.pass);
    if (cp.kind == "sweep") {
      ++sweeps;
      CHECK(cp.threshold == doctest::Approx(6.0 / cp.k));
      if (cp.k == 3) CHECK(cp.D < 0.5);  // segments were built to 1/3 precision
    } else if (cp.kind == "level_end") {
      ++ends;
      CHECK(cp.threshold == doctest::Approx(8.0 / cp.k));
    } else {
      ++sups;
      CHECK(cp.kind == "path_sup");
      CHECK(cp.threshold == doctest::Approx(15.0 / cp.k));
    }
  }
  CHECK(sweeps == 24);
  CHECK(ends == 3);
  CHECK(sups == 3);

  // a word shorter than the schedule is caught before any arithmetic
  Word stub(100, 1);
  CHECK_THROWS_AS(verify_tracking(stub, sch, targets, F), ErgoError);
}

TEST_CASE("entropy certificate: closed form and schedule rows") {
  CHECK(certificate_closed_form(10, kLog2) ==
        doctest::Approx(0.15644921625355568).epsilon(1e-13));
  CHECK(certificate_closed_form(1, 5.0) == 0.0);  // the k=1 coefficient vanishes

  // independent evaluation of the same rational coefficients
  for (int k = 2; k <= 100; ++k) {
    double a = double(k - 1) * double(k - 1) / (double(k) * double(k));
    double independent = a * (kLog2 - 5.0 / k);
    CHECK(std::fabs(certificate_closed_form(k, kLog2) - independent) < 1e-12);
  }

  Schedule sch = build_schedule(levels3(), 3);
  double h1 = markov_entropy(parry_g()), h2 = markov_entropy(perturbed_g());
  std::vector<std::vector<double>> h = {{h1, h2}, {h1, h2}, {h1, h2}};
  std::vector<CertificateRow> rows = entropy_lower_certificate(sch, h);
  REQUIRE(rows.size() == 3);
  double h_mix = 0.5 * h1 + 0.5 * h2;
  for (const CertificateRow& r : rows) {
    CHECK(r.closed_form == doctest::Approx(certificate_closed_form(r.k, h_mix)).epsilon(1e-12));
    CHECK(!r.informative);  // 5/k still dwarfs the entropy at k <= 3
  }
  CHECK(rows[0].raw_count == 0.0);

  // deep schedules turn the bound positive once h > 5/k
  std::vector<LevelSpec> deep;
  for (int k = 1; k <= 8; ++k) {
    LevelSpec L;
    L.k = k;
    TransitionMatrix full;
    full.size = 2;
    full.rows = {{1, 1}, {1, 1}};
    L.components = {parry_measure(full)};
    L.weights = {Rat(1)};
    L.seg_len = {100 * k};
    L.ring_bridge = {1};
    L.up_bridge = 1;
    deep.push_back(L);
  }
  Schedule dsch = build_schedule(deep, 8);
  std::vector<std::vector<double>> dh(8, std::vector<double>{kLog2});
  std::vector<CertificateRow> drows = entropy_lower_certificate(dsch, dh);
  CHECK(drows[7].informative);
  CHECK(drows[7].closed_form == doctest::Approx(certificate_closed_form(8, kLog2)));
  CHECK_THROWS_AS(entropy_lower_certificate(dsch, {{kLog2}}), ErgoError);
}

TEST_CASE("covering-number entropy estimate, symbolic") {
  TransitionMatrix full;
  full.size = 2;
  full.rows = {{1, 1}, {1, 1}};
  MarkovMeasure mfull = parry_measure(full);

  KatokEntropyEstimate e2 = katok_entropy_symbolic(mfull, 12, 1.0, 0.1, 10000, 4242);
  CHECK(e2.window == 12);  // radius 1 adds no agreement symbols
  CHECK(e2.kept_mass >= 0.9);
  CHECK(e2.sep2_count <= e2.cover_count);
  CHECK(e2.cover_count <= e2.sep_count);
  CHECK(std::fabs(e2.estimate - kLog2) < 0.1 * kLog2);

  KatokEntropyEstimate eg = katok_entropy_symbolic(parry_g(), 12, 1.0, 0.1, 10000, 4242);
  CHECK(std::fabs(eg.estimate - kLogPhi) < 0.1 * kLogPhi);

  // a finer radius widens the comparison window
  KatokEntropyEstimate ef = katok_entropy_symbolic(mfull, 12, 0.25, 0.1, 2000, 1);
  CHECK(ef.window == 14);

  // the symbol budget is a hard guard
  try {
    katok_entropy_symbolic(mfull, 12, 1.0, 0.1, 10000, 4242, 100000);
    FAIL("expected budget refusal");
  } catch (const ErgoError& e) {
    CHECK(e.code() == Err::BudgetExceeded);
  }
}
