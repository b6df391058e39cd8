#pragma once
// Subshifts of finite type over alphabets {1..l} given by 0/1 transition
// matrices: mixing checks, Perron eigendata, the entropy-maximizing Markov
// measure, cylinder masses, itinerary sampling, and shortest connecting words.

#include <cstdint>
#include <vector>

#include "ergolab/common.hpp"

namespace ergolab {

// Symbols are 1-based in every public word; B is indexed 0-based internally.
using Word = std::vector<int>;

struct TransitionMatrix {
  int size = 0;
  std::vector<std::vector<int>> rows;  // entries 0/1

  int at(int i, int j) const { return rows[i][j]; }
};

struct MixingReport {
  bool irreducible = false;
  bool aperiodic = false;
  int period = 0;  // gcd of cycle lengths (valid when irreducible)
};

struct PerronData {
  double lambda = 0;
  std::vector<double> u;  // left eigenvector, u B = lambda u
  std::vector<double> v;  // right eigenvector, B v = lambda v
  // normalization: sum_i u_i v_i == 1; both vectors strictly positive
  int iterations = 0;
};

struct MarkovMeasure {
  TransitionMatrix B;
  std::vector<double> p;               // stationary distribution
  std::vector<std::vector<double>> P;  // stochastic transition matrix
};

// Structural checks: rejects zero rows/columns, reports strong connectivity
// and the gcd of cycle lengths.
MixingReport validate_transition_matrix(const TransitionMatrix& B);

inline bool is_mixing(const MixingReport& r) { return r.irreducible && r.aperiodic; }

// Power iteration on B and B^T; stops when the scaled eigen-residual
// ||Bv - lambda v||_inf drops to 1e-12, capped at 1e5 iterations.
// Requires a mixing matrix.
PerronData perron_eigendata(const TransitionMatrix& B);

// Entropy-maximizing (Parry) measure: P_ij = B_ij v_j / (lambda v_i),
// p_i = u_i v_i.
MarkovMeasure parry_measure(const TransitionMatrix& B);

// Assemble a Markov measure from caller-provided stochastic data compatible
// with B; validates stationarity (1e-10) and row sums (1e-12).
MarkovMeasure make_markov_measure(const TransitionMatrix& B, std::vector<double> p,
                                  std::vector<std::vector<double>> P);

// mu([a_0 .. a_m]) = p_{a_0} prod P_{a_i a_{i+1}}; exactly 0 on inadmissible
// words.  Word must be non-empty with symbols in 1..l.
double cylinder_measure(const MarkovMeasure& m, const Word& w);

// h(m) = -sum_i p_i sum_j P_ij log P_ij   (natural log; 0*log0 = 0)
double markov_entropy(const MarkovMeasure& m);

// Seeded, deterministic sample of length n: first symbol from p, then rows
// of P.
Word sample_itinerary(const MarkovMeasure& m, i64 n, std::uint64_t seed);

bool word_admissible(const TransitionMatrix& B, const Word& w);

// Shortest admissible word starting at j1, ending at j2, with at least one
// transition (so length >= 2).  BFS on the transition graph.
Word connecting_word(const TransitionMatrix& B, int j1, int j2);

// L0 = max over ordered symbol pairs of the shortest connecting word length.
int connecting_length_bound(const TransitionMatrix& B);

// Smallest bridge length s >= 0 such that for EVERY ordered symbol pair (a,b)
// there is an admissible word w of length s with a w b admissible (the
// all-pairs feasibility floor used by the orbit-assembly machinery).
int bridge_feasibility_floor(const TransitionMatrix& B);

// True iff some admissible word w of length s has a w b admissible.
bool bridge_feasible(const TransitionMatrix& B, int a, int b, i64 s);

// Lexicographically smallest admissible bridge word of exactly length s
// between end symbol a and start symbol b.  Throws BridgeInfeasible.
Word bridge_word(const TransitionMatrix& B, int a, int b, i64 s);

// Symbolic model of the SQUARE of the shift: alphabet = admissible 2-blocks
// (a,b), with (a,b) -> (c,d) allowed iff B_bc = 1.  Perron eigenvalue is
// lambda(B)^2 — the coding alphabet for the square of a toral automorphism.
struct TwoBlockRecoding {
  TransitionMatrix B2;
  std::vector<std::pair<int, int>> blocks;  // 1-based symbol pairs
};
TwoBlockRecoding two_block_square_recoding(const TransitionMatrix& B);

}  // namespace ergolab
