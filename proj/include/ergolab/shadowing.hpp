#pragma once
// Pseudo-orbits on T^2 and two orbit-correction solvers: a closed-form
// series solver for linear automorphisms and a Newton solver for any
// differentiable surface map supplied through the SurfaceMap handle.

#include <cstdint>
#include <memory>
#include <vector>

#include "ergolab/common.hpp"
#include "ergolab/toral.hpp"

namespace ergolab {

// Differentiable invertible self-map of the 2-torus.  step() applies the map
// once, step_back() its inverse, dstep() the Jacobian of a lift at the point.
struct SurfaceMap {
  virtual ~SurfaceMap() = default;
  virtual TorusPoint step(const TorusPoint& x) const = 0;
  virtual TorusPoint step_back(const TorusPoint& x) const = 0;
  virtual Mat2 dstep(const TorusPoint& x) const = 0;
};

// Adapter: an integer toral automorphism as a SurfaceMap.
class LinearToralMap final : public SurfaceMap {
 public:
  explicit LinearToralMap(const ToralAutomorphism& T) : T_(T) {}
  TorusPoint step(const TorusPoint& x) const override { return toral_apply(T_, x, 1); }
  TorusPoint step_back(const TorusPoint& x) const override { return toral_apply(T_, x, -1); }
  Mat2 dstep(const TorusPoint&) const override { return toral_derivative(T_); }
  const ToralAutomorphism& automorphism() const { return T_; }

 private:
  ToralAutomorphism T_;
};

struct PseudoOrbit {
  std::vector<TorusPoint> points;  // x_0 .. x_N
  std::vector<Vec2> jumps;         // e_n = f(x_n) - x_{n+1}, minimal lift, n = 0..N-1
  double delta = 0;                // max_n ||e_n||_inf
};

struct ShadowResult {
  std::vector<TorusPoint> points;     // corrected orbit z_0 .. z_N
  std::vector<Vec2> corrections;      // z_n - x_n as minimal lifts
  double residual = 0;                // max_n ||f(z_n) - z_{n+1}||_inf
  double tracking = 0;                // max_n ||z_n - x_n||_inf
  double shadow_constant = 0;         // reported c with Delta <= c * delta
  int iterations = 0;
  bool converged = true;
};

// Computes jumps and delta from a point sequence (needs >= 2 points).
PseudoOrbit pseudo_orbit_from_points(const SurfaceMap& f, const std::vector<TorusPoint>& pts);

// Random delta-pseudo-orbit: exact steps plus uniform jumps of sup-norm <= delta.
PseudoOrbit perturbed_orbit(const SurfaceMap& f, const TorusPoint& x0, int n_steps,
                            double delta, std::uint64_t seed);

// Two exact orbit legs glued with a single jump of sup-norm <= delta at index m.
PseudoOrbit single_jump_orbit(const SurfaceMap& f, const TorusPoint& x0, int n_steps, int m,
                              double delta, std::uint64_t seed);

// Closed-form correction for a linear automorphism: each jump is decomposed
// along the eigenbasis, stable components are summed forward and unstable
// components backward (boundary terms truncated at the window ends).
// Residual at interior times is exact to roundoff.  Reports
// c = 1/(1-|lambda_s|) + 1/(lambda_u-1).
ShadowResult linear_shadow(const ToralAutomorphism& T, const PseudoOrbit& po);

// Newton iteration on the orbit residual system F(z)_n = f(z_n) - z_{n+1}.
// The block-bidiagonal correction equation is solved per iteration in
// propagated stable/unstable frames (stable coefficients swept forward,
// unstable coefficients backward).  On a linear map one iteration is exact.
// Does not throw on slow convergence: returns the best iterate with
// converged = false.  Throws SingularJacobian on degenerate derivatives.
ShadowResult newton_shadow(const SurfaceMap& f, const PseudoOrbit& po, double tol = 1e-12,
                           int max_iter = 50);

// Diagnostic per-step jump budgets c * eps0 * exp(-eps * s_n) for
// caller-supplied block indices s_n; flags the steps whose jump exceeds
// the budget.
struct BudgetRow {
  int n = 0;
  double jump = 0;
  double budget = 0;
  bool within = true;
};
std::vector<BudgetRow> shadow_budget_report(const PseudoOrbit& po, double c, double eps0,
                                            double eps, const std::vector<int>& s_indices);

}  // namespace ergolab
