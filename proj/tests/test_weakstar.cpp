#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"

#include "ergolab/sft.hpp"
#include "ergolab/weakstar.hpp"

using namespace ergolab;

namespace {

const double kPi = 3.14159265358979323846;

TransitionMatrix golden() {
  TransitionMatrix B;
  B.size = 2;
  B.rows = {{1, 1}, {1, 0}};
  return B;
}

}  // namespace

TEST_CASE("torus family: ordering, sup norms, and the tail bound") {
  TestFamily F = build_test_family_torus(32);
  REQUIRE(int(F.fns.size()) == 32);
  CHECK(F.fns[0].trig == 0);  // constant first
  CHECK(F.fns[0].lip == 0.0);
  CHECK(F.fns[1].trig == 1);  // cos before sin at each frequency
  CHECK(F.fns[1].m1 == 0);    // |m| = 1 frequencies come first
  CHECK(F.fns[1].m2 == 1);
  CHECK(F.fns[2].trig == 2);
  for (const TestFunction& fn : F.fns) CHECK(fn.sup == 1.0);
  CHECK(F.tail_bound() == doctest::Approx(std::ldexp(1.0, -32)));
}

TEST_CASE("distances: identity, symmetry, bound, triangle") {
  TestFamily F = build_test_family_torus(24);
  MeasurePtr a = measure_from_points({{0.1, 0.2}, {0.4, 0.9}, {0.77, 0.35}});
  MeasurePtr b = measure_from_points({{0.6, 0.6}});
  MeasurePtr c = measure_from_points({{0.25, 0.8}, {0.5, 0.5}});

  CHECK(weakstar_distance(F, *a, *a) == 0.0);
  double dab = weakstar_distance(F, *a, *b);
  CHECK(dab == weakstar_distance(F, *b, *a));
  CHECK(dab > 0.0);
  CHECK(dab <= 1.0);
  double dac = weakstar_distance(F, *a, *c);
  double dcb = weakstar_distance(F, *c, *b);
  CHECK(dab <= dac + dcb + 1e-15);
}

TEST_CASE("integration against empirical torus measures is the plain average") {
  TestFamily F = build_test_family_torus(8);
  std::vector<TorusPoint> pts{{0.0, 0.0}, {0.25, 0.5}};
  MeasurePtr mu = measure_from_points(pts);
  // phi = cos(2 pi x): (cos 0 + cos(pi/2)) / 2 = 1/2
  const TestFunction* cos_x = nullptr;
  for (const TestFunction& fn : F.fns)
    if (fn.trig == 1 && fn.m1 == 1 && fn.m2 == 0) cos_x = &fn;
  REQUIRE(cos_x != nullptr);
  CHECK(integrate(*cos_x, *mu) == doctest::Approx(0.5).epsilon(1e-15));
  // the constant integrates to one on any probability measure
  CHECK(integrate(F.fns[0], *mu) == doctest::Approx(1.0));
}

TEST_CASE("continuity radius: frozen value 1/(6 pi) at k=3") {
  TestFamily F = build_test_family_torus(16);
  CHECK(continuity_radius(F, 3) == doctest::Approx(1.0 / (6.0 * kPi)).epsilon(1e-12));
  // radius shrinks as k grows
  CHECK(continuity_radius(F, 6) < continuity_radius(F, 3));
}

TEST_CASE("shift family on the golden mean: admissible cylinders only") {
  TestFamily F = build_test_family_shift(golden(), 64);
  REQUIRE(int(F.fns.size()) == 64);
  // Fibonacci word counts: 2+3+5+8+13+21 = 52 < 64, so length 7 is reached
  CHECK(F.max_cylinder_len() == 7);
  for (const TestFunction& fn : F.fns) {
    if (fn.trig == 0) continue;  // leading constant has no cylinder
    CHECK(word_admissible(F.B, fn.cyl));
  }
}

TEST_CASE("word empirical measures clamp windows that run off the end") {
  TestFamily F = build_test_family_shift(golden(), 16);
  // E_2 of the word 11: positions 0,1; the cylinder [1,1] matches only at 0
  MeasurePtr mu = measure_from_word({1, 1}, 2);
  TestFunction c11;
  c11.trig = -1;
  c11.cyl = {1, 1};
  c11.sup = 1.0;
  CHECK(integrate(c11, *mu) == doctest::Approx(0.5));
  TestFunction c1;
  c1.trig = -1;
  c1.cyl = {1};
  c1.sup = 1.0;
  CHECK(integrate(c1, *mu) == doctest::Approx(1.0));
}

TEST_CASE("Markov integration matches cylinder masses") {
  MarkovMeasure m = parry_measure(golden());
  MeasurePtr mu = measure_from_markov(m);
  TestFamily F = build_test_family_shift(golden(), 32);
  for (const TestFunction& fn : F.fns) {
    if (fn.trig == 0) continue;
    CHECK(integrate(fn, *mu) == doctest::Approx(cylinder_measure(m, fn.cyl)).epsilon(1e-12));
  }
  CHECK(weakstar_distance(F, *mu, *mu) == 0.0);
}

TEST_CASE("empirical word measures converge to the sampled Markov measure") {
  MarkovMeasure m = parry_measure(golden());
  TestFamily F = build_test_family_shift(golden(), 64);
  MeasurePtr target = measure_from_markov(m);
  Word w = sample_itinerary(m, 200000, 7);
  MeasurePtr emp = measure_from_word(w, i64(w.size()) - 8);
  CHECK(weakstar_distance(F, *emp, *target) < 0.01);
}

TEST_CASE("mixtures are affine in the metric") {
  TestFamily F = build_test_family_torus(24);
  MeasurePtr a = measure_from_points({{0.12, 0.34}, {0.56, 0.78}});
  MeasurePtr b = measure_from_points({{0.9, 0.1}});
  MeasurePtr half = measure_mix({{0.5, a}, {0.5, b}});
  double dab = weakstar_distance(F, *a, *b);
  CHECK(weakstar_distance(F, *half, *b) == doctest::Approx(0.5 * dab).epsilon(1e-12));
  CHECK(weakstar_distance(F, *half, *a) == doctest::Approx(0.5 * dab).epsilon(1e-12));

  CHECK_THROWS_AS(measure_mix({{0.7, a}, {0.7, b}}), ErgoError);  // weights must sum to 1
}

TEST_CASE("space mismatch is rejected") {
  TestFamily Ft = build_test_family_torus(8);
  MeasurePtr word_mu = measure_from_word({1, 1, 2}, 2);
  MeasurePtr pt_mu = measure_from_points({{0.5, 0.5}});
  CHECK_THROWS_AS(weakstar_distance(Ft, *word_mu, *pt_mu), ErgoError);
}
