#pragma once
// Slowed-down toral automorphism: the linear map is replaced, inside a small
// disk around the fixed point O, by the time-1 map of the ODE
//   ds1/dt =  s1 psi(s1^2+s2^2) log(lambda)
//   ds2/dt = -s2 psi(s1^2+s2^2) log(lambda)
// written in the unit eigenbasis of the matrix, with the concrete profile
// psi(u) = min(1, (u/r0^2)^alpha).  Derivatives come from the co-integrated
// variational equation.  Also: finite-time Lyapunov exponents (QR), hyperbolic
// block certificates over finite windows, and exact visit-frequency checks.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ergolab/common.hpp"
#include "ergolab/shadowing.hpp"
#include "ergolab/toral.hpp"

namespace ergolab {

struct KatokMap {
  ToralAutomorphism A;
  double r0 = 0, r1 = 0;     // slowdown core radius < gluing disk radius
  double alpha = 0.5;        // psi exponent, in (0,1)
  double log_lambda = 0;     // log of the unstable eigenvalue
  double ode_tol = 1e-10;    // local error target per unit time
  int max_substeps = 1000000;
  std::vector<std::string> warnings;
};

// Validates 0 < r0 < r1, alpha in (0,1), lambda_u > 1, and that the unit-time
// image of the gluing disk stays inside the coordinate chart
// (lambda * r1 < 1/2).  Throws BadRadii / NotHyperbolic / BadInput.
// Warns when r1 < lambda * r0 (gluing then disagrees with the linear action
// for some boundary trajectories).
KatokMap build_katok_map(i64 a, i64 b, i64 c, i64 d, double r0, double r1, double alpha);

double katok_psi(const KatokMap& m, double u);   // slowdown profile at u = |s|^2
double katok_dpsi(const KatokMap& m, double u);  // its derivative (0 beyond r0^2)

// One step of the glued map and its Jacobian.
TorusPoint katok_step(const KatokMap& m, const TorusPoint& x);
TorusPoint katok_step_back(const KatokMap& m, const TorusPoint& x);
Mat2 katok_dstep(const KatokMap& m, const TorusPoint& x);

// Euclidean distance of the minimal lift to the fixed point O = (0,0).
double dist_to_origin(const TorusPoint& x);

class KatokSurface final : public SurfaceMap {
 public:
  explicit KatokSurface(const KatokMap& m) : m_(m) {}
  TorusPoint step(const TorusPoint& x) const override { return katok_step(m_, x); }
  TorusPoint step_back(const TorusPoint& x) const override { return katok_step_back(m_, x); }
  Mat2 dstep(const TorusPoint& x) const override { return katok_dstep(m_, x); }
  const KatokMap& map() const { return m_; }

 private:
  KatokMap m_;
};

// Finite-time Lyapunov exponents over T steps by QR accumulation of the
// derivative cocycle; returned descending.  cond_log (optional out) receives
// the log condition number of the accumulated cocycle matrix, giving the
// exact sandwich  chi_plus*T <= log||Df^T|| <= chi_plus*T + cond_log.
std::pair<double, double> finite_lyapunov(const SurfaceMap& f, const TorusPoint& x, int T,
                                          double* cond_log = nullptr);

struct OrbitRow {
  int t = 0;
  double x = 0, y = 0;
  bool in_disk = false;      // inside the gluing disk D_{r1}
  double chi_plus_run = 0;   // running top exponent over steps 0..t
};
std::vector<OrbitRow> orbit_series(const KatokMap& m, const TorusPoint& x0, int T);

// Finite-window hyperbolic-block certificate.  Over the two-sided window
// |t| <= T, n >= 1, n + |t| <= T it checks, along estimated invariant
// directions,
//   (a) ||Df^n  | E^s(y_t)|| <= e^{eps k} e^{-(beta1-eps) n} e^{eps |t|}
//   (b) ||Df^-n | E^u(y_t)|| <= e^{eps k} e^{-(beta2-eps) n} e^{eps |t|}
//   (c) tan(angle(E^s, E^u)(y_t)) >= e^{-eps k} e^{-eps |t|}
// and returns the minimal integer k >= 1 passing all three.
struct BlockCheckReport {
  int window = 0;
  int min_k = 0;
  double worst_a = 0, worst_b = 0, worst_c = 0;  // minimal k forced by each family
  double min_angle = 0;                          // radians, over the window
  bool resolved = true;                          // splitting Cauchy check passed
};
BlockCheckReport pesin_block_check(const SurfaceMap& f, const TorusPoint& x, int T, double beta1,
                                   double beta2, double eps, int burn_in = 30);

// Exact frequency certificate: with visit flags over window positions
// 0..W-1 and time origin at index `origin`, verifies
//   #\{ n <= j <= n+k-1 : flag_j \} <= N + k (p + gamma) + |n| gamma
// for every window [n, n+k) inside the flag range (times relative to the
// origin, so both signs of n occur).  All arithmetic exact (128-bit).
bool frequency_check(const std::vector<char>& visits, int origin, i64 N, const Rat& p,
                     const Rat& gamma);

// Smallest N >= 0 making frequency_check pass, or -1 if none <= n_cap.
i64 frequency_min_n(const std::vector<char>& visits, int origin, const Rat& p, const Rat& gamma,
                    i64 n_cap);

// Window classification for the two-case estimate: Case 1 when
// k * p0 <= N + |n| gamma (then k <= (N + |n| gamma)/p0), else Case 2 with
// contraction-rate coefficient (1 - p1 - p0 - gamma).
struct CaseBound {
  int which = 1;
  Rat k_bound{0, 1};  // Case 1: k <= k_bound
  Rat rate{0, 1};     // Case 2: beta = rate * log(lambda_V)
};
CaseBound case_bound_check(i64 N, const Rat& gamma, const Rat& p0, const Rat& p1, i64 k, i64 n);

// Adaptive-Simpson value of \int_0^1 du / psi(u); finite for alpha < 1.
double slowdown_time_integral(const KatokMap& m, double tol = 1e-10);

// Measured expansion floor: min over sampled points at distance > exclude_r
// from O of |Df(x) e_u|_2.  Equals lambda_u when the sample avoids D_{r1}.
double measure_lambda_v(const KatokMap& m, double exclude_r, int samples, std::uint64_t seed);

}  // namespace ergolab
