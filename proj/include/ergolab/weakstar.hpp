#pragma once
// A computable weak* metric: D(mu,nu) = sum_i |int phi_i dmu - int phi_i dnu|
// / (2^{i+1} ||phi_i||) over a fixed countable family of test functions.
// Families are provided for the 2-torus (trigonometric characters) and for
// shift spaces (cylinder indicators).  Truncation at imax perturbs D by at
// most 2^{-imax}.

#include <memory>
#include <optional>
#include <vector>

#include "ergolab/common.hpp"
#include "ergolab/sft.hpp"

namespace ergolab {

enum class SpaceKind { Torus2, Shift };

struct TestFunction {
  // Torus2: trig==0 constant 1, trig==1 cos(2 pi m.x), trig==2 sin(2 pi m.x).
  int trig = 0;
  int m1 = 0, m2 = 0;
  // Shift: indicator of the cylinder [cyl] (symbols 1-based), trig == -1.
  Word cyl;

  double sup = 1.0;  // sup norm
  double lip = 0.0;  // modulus constant w.r.t. the space's metric; 0 = constant
};

struct TestFamily {
  SpaceKind space = SpaceKind::Torus2;
  TransitionMatrix B;  // shift families only
  std::vector<TestFunction> fns;
  int imax = 0;

  double tail_bound() const { return std::ldexp(1.0, -imax); }
  // longest cylinder among the family's indicators (shift families)
  int max_cylinder_len() const;
};

// Torus family: constant first, then cos/sin pairs over half-plane
// frequencies ordered by |m1|+|m2| then lexicographically.  Shift family:
// admissible cylinder indicators ordered by length then lexicographically.
TestFamily build_test_family_torus(int imax);
TestFamily build_test_family_shift(const TransitionMatrix& B, int imax);

//---------------------------------------------------------------------------
// Measures.  A handle is an empirical measure (torus points, or the first n
// shifts of a finite word), a Markov measure integrated via cylinder masses,
// or a finite convex combination.
//---------------------------------------------------------------------------
struct Measure;
using MeasurePtr = std::shared_ptr<const Measure>;

struct EmpiricalTorus {
  std::vector<TorusPoint> pts;
};

struct EmpiricalWord {
  Word w;         // backing symbols
  i64 offset = 0; // first orbit point is sigma^offset(w)
  i64 n = 0;      // number of orbit points
};

struct Measure {
  SpaceKind space = SpaceKind::Torus2;
  std::optional<EmpiricalTorus> emp_torus;
  std::optional<EmpiricalWord> emp_word;
  std::optional<MarkovMeasure> markov;
  std::vector<std::pair<double, MeasurePtr>> mix;  // convex combination
};

MeasurePtr measure_from_points(std::vector<TorusPoint> pts);
// Empirical measure of sigma^offset w, ..., sigma^{offset+n-1} w.  Cylinder
// evaluations whose window runs off the end of w count as mismatch.
MeasurePtr measure_from_word(Word w, i64 n, i64 offset = 0);
MeasurePtr measure_from_markov(MarkovMeasure m);
// weights must be positive and sum to 1 within 1e-12; spaces must agree
MeasurePtr measure_mix(std::vector<std::pair<double, MeasurePtr>> parts);

// int phi dmu.  SpaceMismatch if the function's space does not match.
double integrate(const TestFunction& fn, const Measure& mu);

// the weak* distance; both measures must live on the family's space
double weakstar_distance(const TestFamily& F, const Measure& mu, const Measure& nu);

// b_k = min over j <= k, phi_j non-constant, of (1/k) ||phi_j|| / Lip(phi_j);
// +infinity when every phi_j with j <= k is constant.  Guarantees
// |phi_j(x) - phi_j(y)| < (1/k)||phi_j|| whenever d(x,y) < b_k.
double continuity_radius(const TestFamily& F, int k);

}  // namespace ergolab
