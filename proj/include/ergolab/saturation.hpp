#pragma once
// Quasi-orbit construction: rational convex approximation of a target
// measure, pools of measure-typical segments, the integer schedule
// (N_k, X_k, Y_k, T_k and the M-offsets), symbolic assembly with exact
// bridge words, checkpointed tracking verification, the entropy
// lower-bound certificate, and covering-number entropy estimates.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ergolab/common.hpp"
#include "ergolab/sft.hpp"
#include "ergolab/shadowing.hpp"
#include "ergolab/weakstar.hpp"

namespace ergolab {

//---------------------------------------------------------------------------
// Level data and the schedule.
//---------------------------------------------------------------------------

// One precision level: a rational convex combination of Markov components,
// segment lengths, and bridge lengths (within-level ring plus the link to
// the next level's first component).
struct LevelSpec {
  int k = 1;
  std::vector<MarkovMeasure> components;  // m_{k,1..p}
  std::vector<Rat> weights;               // a_{k,j}; must sum to 1 exactly
  std::vector<i64> seg_len;               // n(k,j) >= 1
  std::vector<i64> ring_bridge;           // s(m_j -> m_{j+1}), cyclic, size p
  i64 up_bridge = 1;                      // s(m_{k,1} -> m_{k+1,1}); ignored at the last level
};

struct ScheduleLevel {
  int k = 1;
  std::vector<Rat> C;          // a_j / n_j
  std::vector<i64> seg_count;  // N * C_j, exact integers
  i64 N = 0, X = 0, Y = 0, T = 0;
  i64 M = 0;  // start offset of the level
};

struct Schedule {
  std::vector<LevelSpec> levels;
  std::vector<ScheduleLevel> rows;
  int K = 0;
  i64 total_len = 0;  // M_{K+1}

  // sweep start: M_k + (i-1) Y_k, 1-based i in [1, T_k]
  i64 sweep_start(int k, i64 i) const;
  // block start within a sweep: segments and ring bridges of blocks < j
  i64 block_start(int k, i64 i, int j) const;
  // segment start: block start + (t-1) n(k,j), 1-based t
  i64 segment_start(int k, i64 i, int j, i64 t) const;
};

// N_k = smallest multiple of lcm(denominators of C_{k,j}) at least
// k * (sum of all bridge lengths through level min(k+1,K)); X_k = ring sum;
// Y_k = N_k + X_k; T_k minimal, strictly increasing, satisfying
//   (growth)  sum_{r<=k} Y_r T_r >= (k+1) Y_{k+1}
//   (domination)  Y_{k+1} T_{k+1} >= (k+1) * sum_{r<=k} (Y_r T_r + up_r)
// All arithmetic overflow-checked; DepthOverflow names the offending level.
Schedule build_schedule(const std::vector<LevelSpec>& levels, int K);

//---------------------------------------------------------------------------
// Rational convex approximation.
//---------------------------------------------------------------------------
struct RationalApprox {
  std::vector<std::size_t> chosen;  // indices into the candidate list
  std::vector<Rat> weights;         // matching positive weights, sum 1
  double dist = 0;                  // D(mu, combination)
  std::optional<double> entropy_gap;  // |h_mu - sum a_j h_j| when supplied
};

// Exhaustive search over weight vectors with common denominator q = 1..den_bound
// (smallest q first, lexicographic within q) for a combination of candidates
// within 1/k of mu.  Throws NoFeasibleCombination when the grid cannot reach
// 1/k; the message carries the best distance found.
RationalApprox rational_approximation(const Measure& mu, int k,
                                      const std::vector<MarkovMeasure>& candidates,
                                      const TestFamily& F, i64 den_bound,
                                      const std::vector<double>* candidate_entropy = nullptr,
                                      double mu_entropy = 0);

//---------------------------------------------------------------------------
// Segment pools.
//---------------------------------------------------------------------------
struct SegmentPool {
  int k = 1;
  i64 n = 0;
  int anchor = 1;  // every pool word starts here, and may be followed by it
  std::vector<Word> words;
  std::vector<int> end_symbol;
  double acceptance = 1.0;
  i64 attempts = 0;
};

// Rejection-samples itineraries of length n started at the anchor symbol
// (default: the most likely state) until pool_size words satisfy both the
// junction condition B(end, anchor) = 1 and D(E_n(word), m) < 1/k.
// Throws AcceptanceTooLow when the running acceptance rate drops below
// accept_floor after a warm-up of attempts.
SegmentPool build_segment_pool(const MarkovMeasure& m, const TestFamily& F, i64 n, int k,
                               int pool_size, std::uint64_t seed, double accept_floor = 1e-4,
                               int anchor = 0);

//---------------------------------------------------------------------------
// Assembly.
//---------------------------------------------------------------------------
struct SegmentPlacement {
  int k = 1;
  i64 i = 1;  // sweep
  int j = 1;  // block
  i64 t = 1;  // copy within the block
  i64 pos = 0;
  i64 len = 0;
};

struct Assembly {
  Word word;
  std::vector<SegmentPlacement> segments;
  i64 bridge_symbols = 0;
};

// Concatenates, level by level and sweep by sweep, round-robin draws from
// pools[k-1][j-1] joined by exact-length bridge words, with cross-level
// bridges between levels.  The result is admissible and every segment start
// lands exactly on its scheduled offset.
Assembly assemble_symbolic(const Schedule& sch, const std::vector<std::vector<SegmentPool>>& pools,
                           const TransitionMatrix& B);

//---------------------------------------------------------------------------
// Tracking verification.
//---------------------------------------------------------------------------
struct Checkpoint {
  std::string kind;  // "sweep", "level_end", "path_sup"
  int k = 1;
  i64 i = 0;  // sweep index for "sweep" rows, else 0
  i64 n = 0;  // window length (sweep rows: offset stored in `pos`)
  i64 pos = 0;
  double D = 0;
  double threshold = 0;
  bool pass = true;
};

struct TrackingReport {
  std::vector<Checkpoint> rows;
  bool all_pass = true;
  // min over rows of threshold - D; reports always carry at least one row,
  // so the sentinel never leaks into serialized output
  double worst_margin = std::numeric_limits<double>::infinity();
};

// Checks, per level k: every sweep window D(E_{Y_k} at sweep start, mu_k)
// <= 6/k; the level-end prefix D(E_{M_{k+1}}, mu_k) <= 8/k; and the sup over
// intermediate n in (M_k, M_{k+1}] of the distance to the segment from
// mu_{k-1} to mu_k <= 15/k (path distance minimized over a 21-point grid).
TrackingReport verify_tracking(const Word& w, const Schedule& sch,
                               const std::vector<MeasurePtr>& level_targets,
                               const TestFamily& F);

//---------------------------------------------------------------------------
// Entropy certificate and covering estimates.
//---------------------------------------------------------------------------
struct CertificateRow {
  int k = 1;
  double closed_form = 0;  // (1-1/k)^2 (sum a_j h_j - 1/k) - (4/k)(1-1/k)^2
  double raw_count = 0;    // (1/Y_k) sum_j N_k C_{k,j} n_j (1-1/k)(h_j - 4/k)
  bool informative = false;  // closed form > 0
};

// Exact rational coefficients; the (irrational) entropies multiply in only
// at the final rounding.  h.size() must match the level's component count.
std::vector<CertificateRow> entropy_lower_certificate(const Schedule& sch,
                                                      const std::vector<std::vector<double>>& h);

// Closed form alone, for a single level: exact coefficients applied to h.
double certificate_closed_form(int k, double h);

struct KatokEntropyEstimate {
  double estimate = 0;   // log(cover_count) / n
  i64 cover_count = 0;   // balls needed for mass >= 1 - delta
  i64 sep_count = 0;     // greedy (n, eps)-separated count
  i64 sep2_count = 0;    // greedy (n, 2 eps)-separated count
  double kept_mass = 0;  // fraction actually covered
  i64 window = 0;        // symbols compared per sample (symbolic path)
};

// Symbolic path: samples itineraries, identifies eps-Bowen balls with
// agreement windows (eps = 2^{-m} compares n+m symbols), keeps the heaviest
// classes covering mass >= 1-delta.  Budget guards the total symbol count.
KatokEntropyEstimate katok_entropy_symbolic(const MarkovMeasure& m, int n, double eps,
                                            double delta, int sample_size, std::uint64_t seed,
                                            i64 budget = 100000000);

// Geometric path: orbits of sampled points under the map, covered by
// d^n-balls of radius eps via a greedy separated sweep (each still-uncovered
// sample in order becomes a center), stopping at mass 1-delta; greedy
// separated sets over the covered portion as companions.
KatokEntropyEstimate katok_entropy_geometric(const SurfaceMap& f,
                                             const std::function<TorusPoint(Rng&)>& sampler,
                                             int n, double eps, double delta, int sample_size,
                                             std::uint64_t seed, i64 budget = 1000000000);

}  // namespace ergolab
