#pragma once
// Shared plumbing: error taxonomy, exact rational arithmetic, small 2D linear
// algebra, torus metric helpers, and a deterministic RNG facade.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ergolab {

//---------------------------------------------------------------------------
// Error taxonomy.  Codes group into three CLI exit classes:
//   2 = invalid input / failed validation
//   3 = numerical non-convergence
//   4 = infeasible construction
//---------------------------------------------------------------------------
enum class Err {
  // validation
  ZeroRowOrColumn,
  NotMixing,
  SymbolOutOfRange,
  TooShort,
  SpaceMismatch,
  NotHyperbolic,
  OverlapDetected,
  CoverageGap,
  MarkovViolation,
  BoundaryAmbiguity,
  EmptyIntersection,
  BadRadii,
  BadInput,
  // numerical
  NoConvergence,
  SingularJacobian,
  IntegratorUnderflow,
  SplittingNotResolved,
  // infeasible
  NoFeasibleCombination,
  AcceptanceTooLow,
  DepthOverflow,
  BridgeInfeasible,
  BudgetExceeded,
};

inline const char* err_name(Err e) {
  switch (e) {
    case Err::ZeroRowOrColumn: return "ZeroRowOrColumn";
    case Err::NotMixing: return "NotMixing";
    case Err::SymbolOutOfRange: return "SymbolOutOfRange";
    case Err::TooShort: return "TooShort";
    case Err::SpaceMismatch: return "SpaceMismatch";
    case Err::NotHyperbolic: return "NotHyperbolic";
    case Err::OverlapDetected: return "OverlapDetected";
    case Err::CoverageGap: return "CoverageGap";
    case Err::MarkovViolation: return "MarkovViolation";
    case Err::BoundaryAmbiguity: return "BoundaryAmbiguity";
    case Err::EmptyIntersection: return "EmptyIntersection";
    case Err::BadRadii: return "BadRadii";
    case Err::BadInput: return "BadInput";
    case Err::NoConvergence: return "NoConvergence";
    case Err::SingularJacobian: return "SingularJacobian";
    case Err::IntegratorUnderflow: return "IntegratorUnderflow";
    case Err::SplittingNotResolved: return "SplittingNotResolved";
    case Err::NoFeasibleCombination: return "NoFeasibleCombination";
    case Err::AcceptanceTooLow: return "AcceptanceTooLow";
    case Err::DepthOverflow: return "DepthOverflow";
    case Err::BridgeInfeasible: return "BridgeInfeasible";
    case Err::BudgetExceeded: return "BudgetExceeded";
  }
  return "Unknown";
}

inline int err_exit_code(Err e) {
  switch (e) {
    case Err::NoConvergence:
    case Err::SingularJacobian:
    case Err::IntegratorUnderflow:
    case Err::SplittingNotResolved:
      return 3;
    case Err::NoFeasibleCombination:
    case Err::AcceptanceTooLow:
    case Err::DepthOverflow:
    case Err::BridgeInfeasible:
    case Err::BudgetExceeded:
      return 4;
    default:
      return 2;
  }
}

class ErgoError : public std::runtime_error {
 public:
  ErgoError(Err code, const std::string& what)
      : std::runtime_error(std::string(err_name(code)) + ": " + what), code_(code) {}
  Err code() const { return code_; }
  int exit_code() const { return err_exit_code(code_); }

 private:
  Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& what) {
  throw ErgoError(code, what);
}

//---------------------------------------------------------------------------
// Exact rational arithmetic on int64 with __int128 intermediates.
// Construction indices can legitimately grow huge; anything past 2^63-1
// raises DepthOverflow rather than wrapping.
//---------------------------------------------------------------------------
using i64 = std::int64_t;
using i128 = __int128;

inline i64 checked_i64(i128 v, const std::string& ctx) {
  if (v > i128(std::numeric_limits<i64>::max()) || v < -i128(std::numeric_limits<i64>::max()))
    fail(Err::DepthOverflow, "integer overflow in " + ctx);
  return static_cast<i64>(v);
}

inline i64 mul_i64(i64 a, i64 b, const std::string& ctx = "product") {
  return checked_i64(i128(a) * i128(b), ctx);
}
inline i64 add_i64(i64 a, i64 b, const std::string& ctx = "sum") {
  return checked_i64(i128(a) + i128(b), ctx);
}

struct Rat {
  i64 num = 0;
  i64 den = 1;

  Rat() = default;
  Rat(i64 n) : num(n), den(1) {}
  Rat(i64 n, i64 d) : num(n), den(d) { normalize(); }

  void normalize() {
    if (den == 0) fail(Err::BadInput, "rational with zero denominator");
    if (den < 0) { num = -num; den = -den; }
    i64 g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) { num /= g; den /= g; }
  }

  double value() const { return double(num) / double(den); }
  bool is_zero() const { return num == 0; }

  friend Rat operator+(const Rat& a, const Rat& b) {
    i64 g = std::gcd(a.den, b.den);
    i64 dl = a.den / g;
    i128 n = i128(a.num) * (b.den / g) + i128(b.num) * dl;
    i128 d = i128(dl) * b.den;
    Rat r;
    r.num = checked_i64(n, "rational add");
    r.den = checked_i64(d, "rational add");
    r.normalize();
    return r;
  }
  friend Rat operator-(const Rat& a, const Rat& b) { return a + Rat(-b.num, b.den); }
  friend Rat operator*(const Rat& a, const Rat& b) {
    i64 g1 = std::gcd(a.num < 0 ? -a.num : a.num, b.den);
    i64 g2 = std::gcd(b.num < 0 ? -b.num : b.num, a.den);
    Rat r;
    r.num = mul_i64(a.num / g1, b.num / g2, "rational mul");
    r.den = mul_i64(a.den / g2, b.den / g1, "rational mul");
    r.normalize();
    return r;
  }
  friend Rat operator/(const Rat& a, const Rat& b) {
    if (b.num == 0) fail(Err::BadInput, "rational division by zero");
    return a * Rat(b.den, b.num);
  }
  friend bool operator==(const Rat& a, const Rat& b) { return a.num == b.num && a.den == b.den; }
  friend bool operator<(const Rat& a, const Rat& b) {
    return i128(a.num) * b.den < i128(b.num) * a.den;
  }
  friend bool operator<=(const Rat& a, const Rat& b) {
    return i128(a.num) * b.den <= i128(b.num) * a.den;
  }
};

inline i64 lcm_i64(i64 a, i64 b) {
  i64 g = std::gcd(a, b);
  return mul_i64(a / g, b, "lcm");
}

// ceil(a/b) for positive b
inline i64 ceil_div(i64 a, i64 b) {
  return a >= 0 ? (a + b - 1) / b : -((-a) / b);
}

//---------------------------------------------------------------------------
// Tiny fixed-size linear algebra (everything in this project is 2x2).
//---------------------------------------------------------------------------
struct Vec2 {
  double x = 0, y = 0;
  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}
  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double c) const { return {c * x, c * y}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  double norm_inf() const { return std::max(std::fabs(x), std::fabs(y)); }
};
inline Vec2 operator*(double c, const Vec2& v) { return v * c; }

struct Mat2 {
  // row-major: [[a,b],[c,d]]
  double a = 1, b = 0, c = 0, d = 1;
  Vec2 apply(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
  Mat2 mul(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  double det() const { return a * d - b * c; }
  Mat2 inverse() const {
    double dt = det();
    if (std::fabs(dt) < 1e-300) fail(Err::SingularJacobian, "2x2 inverse of singular matrix");
    return {d / dt, -b / dt, -c / dt, a / dt};
  }
  Mat2 transpose() const { return {a, c, b, d}; }
  double norm_inf() const {
    return std::max(std::fabs(a) + std::fabs(b), std::fabs(c) + std::fabs(d));
  }
};

//---------------------------------------------------------------------------
// Torus T^2 = R^2/Z^2 helpers.  Points live in [0,1)^2; the metric is the
// max-metric evaluated on minimal lifts.
//---------------------------------------------------------------------------
struct TorusPoint {
  double x = 0, y = 0;
};

inline double wrap01(double v) {
  double w = v - std::floor(v);
  if (w >= 1.0) w -= 1.0;  // floor can land exactly on 1 for tiny negatives
  if (w < 0.0) w += 0.0;
  return w;
}

inline TorusPoint wrap(const Vec2& v) { return {wrap01(v.x), wrap01(v.y)}; }

// signed representative of v mod 1 in [-1/2, 1/2)
inline double signed_frac(double v) {
  double w = v - std::round(v);
  if (w >= 0.5) w -= 1.0;
  if (w < -0.5) w += 1.0;
  return w;
}

// minimal lift of (b - a), componentwise in [-1/2, 1/2)
inline Vec2 torus_diff(const TorusPoint& b, const TorusPoint& a) {
  return {signed_frac(b.x - a.x), signed_frac(b.y - a.y)};
}

inline double torus_dist(const TorusPoint& a, const TorusPoint& b) {
  Vec2 d = torus_diff(b, a);
  return d.norm_inf();
}

inline TorusPoint torus_add(const TorusPoint& p, const Vec2& v) {
  return {wrap01(p.x + v.x), wrap01(p.y + v.y)};
}

//---------------------------------------------------------------------------
// Deterministic RNG.  splitmix-seeded xoshiro-free: we stick to one fixed,
// fully specified generator (std::mt19937_64 has a pinned algorithm in the
// standard) and hand-roll the variate transforms so byte-identical streams
// are reproducible across platforms and library versions.
//---------------------------------------------------------------------------
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  // uniform double in [0,1) with 53 random bits
  double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n) by rejection (unbiased, deterministic)
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) fail(Err::BadInput, "Rng::below(0)");
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do { v = eng_(); } while (v >= limit);
    return v % n;
  }

  // sample an index from a probability vector (cumulative scan)
  int discrete(const std::vector<double>& p) {
    double u = uniform();
    double acc = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      acc += p[i];
      if (u < acc) return int(i);
    }
    return int(p.size()) - 1;
  }

 private:
  std::mt19937_64 eng_;
};

//---------------------------------------------------------------------------
// Compensated (Kahan) accumulation for the longer sums.
//---------------------------------------------------------------------------
struct Kahan {
  double sum = 0, carry = 0;
  void add(double v) {
    double y = v - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

}  // namespace ergolab
