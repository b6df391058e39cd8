#pragma once
// Hyperbolic automorphisms of T^2 and Markov partitions supplied as data.
// Rectangles live in (s,u) coordinates w.r.t. the unit stable/unstable
// eigenvectors; the loader is the oracle: it checks tiling (sampled),
// the Markov fiber conditions (exact interval arithmetic over the lattice
// translate structure), and computes the transition matrix B(R).

#include <optional>
#include <string>
#include <vector>

#include "ergolab/common.hpp"
#include "ergolab/sft.hpp"

namespace ergolab {

struct ToralAutomorphism {
  i64 a = 1, b = 0, c = 0, d = 1;  // [[a,b],[c,d]], |det| = 1
  double lambda_u = 0;             // eigenvalue with |lambda| > 1
  double lambda_s = 0;             // the other one (may be negative)
  Vec2 e_u, e_s;                   // unit eigenvectors (orthogonal iff symmetric)
};

// Validates integrality/unimodularity/hyperbolicity and fills eigendata via
// the closed-form quadratic.  NotHyperbolic on unit-circle spectrum or
// |det| != 1.
ToralAutomorphism make_toral(i64 a, i64 b, i64 c, i64 d);

// f^power(x) mod Z^2.  Uses exact integer matrix powers (128-bit) for
// |power| <= 62, falling back to repeated application beyond that.
TorusPoint toral_apply(const ToralAutomorphism& T, const TorusPoint& x, i64 power);

// derivative of f (constant): the matrix itself as doubles
Mat2 toral_derivative(const ToralAutomorphism& T);

// (s,u) coordinates of a plane vector w.r.t. the eigenbasis
Vec2 to_su(const ToralAutomorphism& T, const Vec2& xy);
Vec2 from_su(const ToralAutomorphism& T, const Vec2& su);

//---------------------------------------------------------------------------
// Markov partitions.
//---------------------------------------------------------------------------
struct PartRect {
  double s0 = 0, u0 = 0;  // corner in (s,u)
  double S = 0, U = 0;    // side lengths; the rectangle is the product
                          // [s0, s0+S] x [u0, u0+U]
};

struct PairCrossing {
  int j = 0;       // target rectangle (0-based)
  Vec2 t;          // lattice translate in (s,u): G z lands in R_j + t
  bool unique = true;
};

struct MarkovPartition {
  ToralAutomorphism T;
  std::vector<PartRect> rects;
  TransitionMatrix B;
  double S_max = 0, U_max = 0;
  bool fixed_point_interior = false;  // is O = (0,0) interior to a rectangle?
  std::vector<std::string> warnings;

  Vec2 lat1, lat2;  // images of e1, e2 in (s,u) (lattice basis)
  // crossing[i] = admissible targets of rectangle i with their translates
  std::vector<std::vector<PairCrossing>> crossing;
  // candidate integer shifts for point-membership tests, per rectangle
  std::vector<std::vector<std::pair<int, int>>> member_shifts;
};

struct LocateResult {
  int index = 0;       // 1-based rectangle symbol
  double clearance = 0;  // distance to the rectangle boundary in (s,u)
};

struct PartitionCheckOptions {
  int samples = 100000;        // tiling audit sample count
  std::uint64_t seed = 12345;  // audit sampling seed
  double tol = 1e-9;           // geometric slack for inclusions
};

// Validate + assemble.  Errors: OverlapDetected, CoverageGap,
// MarkovViolation (each with a witness in the message).
MarkovPartition load_partition(const ToralAutomorphism& T, std::vector<PartRect> rects,
                               const PartitionCheckOptions& opts = {});

// Which rectangle contains x?  BoundaryAmbiguity if the best clearance is
// below `margin` or no rectangle contains the point.
LocateResult locate(const MarkovPartition& P, const TorusPoint& x, double margin);

struct Itinerary {
  Word w;           // symbols for times n_minus .. n_plus (1-based rectangles)
  i64 n_minus = 0;  // window start (<= 0)
  i64 n_plus = 0;   // window end (>= 0)

  int at(i64 time) const { return w[std::size_t(time - n_minus)]; }
  i64 length() const { return i64(w.size()); }
};

// q_i = rectangle index of f^i(x) for n_minus <= i <= n_plus; every orbit
// point must clear the boundary by `margin` (else BoundaryAmbiguity with the
// offending time index).
Itinerary encode(const MarkovPartition& P, const TorusPoint& x, i64 n_minus, i64 n_plus,
                 double margin = 1e-9);

struct DecodedPoint {
  TorusPoint x;
  double err_bound = 0;  // max(S_max |lambda_s|^{|n-|}, U_max lambda_u^{-n+})
  double err_s = 0;      // half-width of the stable interval actually achieved
  double err_u = 0;      // half-width of the unstable interval
};

// Nested-rectangle reconstruction.  Backward symbols pin the stable
// coordinate, forward symbols the unstable one (contraction directions).
// EmptyIntersection if the word is not admissible for B(R) or hits an
// ambiguous crossing.
DecodedPoint decode(const MarkovPartition& P, const Itinerary& it);

// Lebesgue area of each rectangle (equals the Parry mass of its symbol for
// a correct maximal-measure partition).
std::vector<double> rectangle_areas(const MarkovPartition& P);

}  // namespace ergolab
