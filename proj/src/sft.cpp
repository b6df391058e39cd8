#include "ergolab/sft.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

namespace ergolab {

namespace {

void check_square(const TransitionMatrix& B) {
  if (B.size <= 0) fail(Err::BadInput, "transition matrix must have positive size");
  if (int(B.rows.size()) != B.size) fail(Err::BadInput, "row count != size");
  for (const auto& r : B.rows) {
    if (int(r.size()) != B.size) fail(Err::BadInput, "ragged transition matrix");
    for (int e : r)
      if (e != 0 && e != 1) fail(Err::BadInput, "transition entries must be 0/1");
  }
}

void check_symbol(const TransitionMatrix& B, int s) {
  if (s < 1 || s > B.size) fail(Err::SymbolOutOfRange, "symbol " + std::to_string(s));
}

// forward BFS reachability from node s (0-based)
std::vector<int> reach(const TransitionMatrix& B, int s, bool transpose) {
  std::vector<int> seen(B.size, 0);
  std::queue<int> q;
  seen[s] = 1;
  q.push(s);
  while (!q.empty()) {
    int i = q.front();
    q.pop();
    for (int j = 0; j < B.size; ++j) {
      int e = transpose ? B.at(j, i) : B.at(i, j);
      if (e && !seen[j]) {
        seen[j] = 1;
        q.push(j);
      }
    }
  }
  return seen;
}

}  // namespace

MixingReport validate_transition_matrix(const TransitionMatrix& B) {
  check_square(B);
  for (int i = 0; i < B.size; ++i) {
    int row = 0, col = 0;
    for (int j = 0; j < B.size; ++j) {
      row += B.at(i, j);
      col += B.at(j, i);
    }
    if (row == 0) fail(Err::ZeroRowOrColumn, "row " + std::to_string(i + 1) + " is zero");
    if (col == 0) fail(Err::ZeroRowOrColumn, "column " + std::to_string(i + 1) + " is zero");
  }

  MixingReport rep;
  auto fwd = reach(B, 0, false);
  auto bwd = reach(B, 0, true);
  rep.irreducible = std::all_of(fwd.begin(), fwd.end(), [](int v) { return v; }) &&
                    std::all_of(bwd.begin(), bwd.end(), [](int v) { return v; });
  if (!rep.irreducible) return rep;

  // BFS levels from node 0; the period is gcd over edges of level[i]+1-level[j].
  std::vector<int> level(B.size, -1);
  std::queue<int> q;
  level[0] = 0;
  q.push(0);
  while (!q.empty()) {
    int i = q.front();
    q.pop();
    for (int j = 0; j < B.size; ++j)
      if (B.at(i, j) && level[j] < 0) {
        level[j] = level[i] + 1;
        q.push(j);
      }
  }
  int g = 0;
  for (int i = 0; i < B.size; ++i)
    for (int j = 0; j < B.size; ++j)
      if (B.at(i, j)) g = std::gcd(g, std::abs(level[i] + 1 - level[j]));
  rep.period = g == 0 ? 1 : g;
  rep.aperiodic = rep.period == 1;
  return rep;
}

PerronData perron_eigendata(const TransitionMatrix& B) {
  auto rep = validate_transition_matrix(B);
  if (!is_mixing(rep))
    fail(Err::NotMixing, rep.irreducible ? "matrix has period " + std::to_string(rep.period)
                                         : "matrix is not irreducible");

  const int l = B.size;
  // stop on the eigen-residual itself (the invariant audited below), not on
  // successive eigenvalue differences: those go quiet early when the second
  // eigenvalue is close to the first, leaving the vector far from converged
  const double tol = 1e-12;
  const int cap = 100000;

  auto iterate = [&](bool transpose, std::vector<double>& vec, int& iters) {
    vec.assign(l, 1.0 / l);
    for (iters = 0; iters < cap; ++iters) {
      std::vector<double> next(l, 0.0);
      for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j)
          if (transpose ? B.at(j, i) : B.at(i, j)) next[i] += vec[j];
      double s = std::accumulate(next.begin(), next.end(), 0.0);
      // with ||vec||_1 = 1 and vec > 0, s estimates the eigenvalue
      double res = 0, vecmax = 0;
      for (int i = 0; i < l; ++i) {
        res = std::max(res, std::fabs(next[i] - s * vec[i]));
        vecmax = std::max(vecmax, vec[i]);
      }
      for (auto& x : next) x /= s;
      vec.swap(next);
      if (res <= tol * s * vecmax) return s;
    }
    fail(Err::NoConvergence, "power iteration hit the iteration cap");
  };

  PerronData pd;
  int it_v = 0, it_u = 0;
  double lam_v = iterate(false, pd.v, it_v);
  double lam_u = iterate(true, pd.u, it_u);
  pd.iterations = std::max(it_v, it_u);

  // Rayleigh estimate through both eigenvectors
  double uBv = 0, uv = 0;
  for (int i = 0; i < l; ++i) {
    uv += pd.u[i] * pd.v[i];
    for (int j = 0; j < l; ++j)
      if (B.at(i, j)) uBv += pd.u[i] * pd.v[j];
  }
  pd.lambda = uBv / uv;
  (void)lam_v;
  (void)lam_u;

  // scale u so that sum u_i v_i = 1
  for (auto& x : pd.u) x /= uv;

  // residual audit (the advertised invariants)
  double res = 0, vmax = 0, umax = 0;
  for (int i = 0; i < l; ++i) {
    double bv = 0, ub = 0;
    for (int j = 0; j < l; ++j) {
      if (B.at(i, j)) bv += pd.v[j];
      if (B.at(j, i)) ub += pd.u[j];
    }
    res = std::max(res, std::fabs(bv - pd.lambda * pd.v[i]));
    res = std::max(res, std::fabs(ub - pd.lambda * pd.u[i]));
    vmax = std::max(vmax, pd.v[i]);
    umax = std::max(umax, pd.u[i]);
  }
  if (res > 1e-10 * pd.lambda * std::max(vmax, umax))
    fail(Err::NoConvergence, "eigen residual above tolerance");
  return pd;
}

MarkovMeasure parry_measure(const TransitionMatrix& B) {
  PerronData pd = perron_eigendata(B);
  const int l = B.size;
  MarkovMeasure m;
  m.B = B;
  m.p.resize(l);
  m.P.assign(l, std::vector<double>(l, 0.0));
  for (int i = 0; i < l; ++i) {
    m.p[i] = pd.u[i] * pd.v[i];
    for (int j = 0; j < l; ++j)
      if (B.at(i, j)) m.P[i][j] = pd.v[j] / (pd.lambda * pd.v[i]);
  }
  return m;
}

MarkovMeasure make_markov_measure(const TransitionMatrix& B, std::vector<double> p,
                                  std::vector<std::vector<double>> P) {
  check_square(B);
  const int l = B.size;
  if (int(p.size()) != l || int(P.size()) != l)
    fail(Err::BadInput, "measure dimensions do not match the matrix");
  for (int i = 0; i < l; ++i) {
    if (int(P[i].size()) != l) fail(Err::BadInput, "ragged stochastic matrix");
    double row = 0;
    for (int j = 0; j < l; ++j) {
      if (P[i][j] < 0) fail(Err::BadInput, "negative transition probability");
      if (P[i][j] > 0 && !B.at(i, j))
        fail(Err::BadInput, "P puts mass on a forbidden transition");
      row += P[i][j];
    }
    if (std::fabs(row - 1.0) > 1e-12)
      fail(Err::BadInput, "row " + std::to_string(i + 1) + " of P does not sum to 1");
    if (p[i] < 0) fail(Err::BadInput, "negative stationary mass");
  }
  double tot = std::accumulate(p.begin(), p.end(), 0.0);
  if (std::fabs(tot - 1.0) > 1e-12) fail(Err::BadInput, "p does not sum to 1");
  for (int j = 0; j < l; ++j) {
    double pj = 0;
    for (int i = 0; i < l; ++i) pj += p[i] * P[i][j];
    if (std::fabs(pj - p[j]) > 1e-10) fail(Err::BadInput, "p is not stationary for P");
  }
  MarkovMeasure m;
  m.B = B;
  m.p = std::move(p);
  m.P = std::move(P);
  return m;
}

double cylinder_measure(const MarkovMeasure& m, const Word& w) {
  if (w.empty()) fail(Err::TooShort, "cylinder word is empty");
  for (int s : w) check_symbol(m.B, s);
  double mass = m.p[w[0] - 1];
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    if (!m.B.at(w[i] - 1, w[i + 1] - 1)) return 0.0;
    mass *= m.P[w[i] - 1][w[i + 1] - 1];
  }
  return mass;
}

double markov_entropy(const MarkovMeasure& m) {
  Kahan h;
  for (int i = 0; i < m.B.size; ++i)
    for (int j = 0; j < m.B.size; ++j) {
      double q = m.P[i][j];
      if (q > 0) h.add(-m.p[i] * q * std::log(q));
    }
  return h.value();
}

Word sample_itinerary(const MarkovMeasure& m, i64 n, std::uint64_t seed) {
  if (n < 1) fail(Err::TooShort, "itinerary length must be >= 1");
  Rng rng(seed);
  Word w;
  w.reserve(std::size_t(n));
  int cur = rng.discrete(m.p);
  w.push_back(cur + 1);
  for (i64 t = 1; t < n; ++t) {
    cur = rng.discrete(m.P[cur]);
    w.push_back(cur + 1);
  }
  return w;
}

bool word_admissible(const TransitionMatrix& B, const Word& w) {
  for (int s : w) check_symbol(B, s);
  for (std::size_t i = 0; i + 1 < w.size(); ++i)
    if (!B.at(w[i] - 1, w[i + 1] - 1)) return false;
  return true;
}

Word connecting_word(const TransitionMatrix& B, int j1, int j2) {
  auto rep = validate_transition_matrix(B);
  if (!is_mixing(rep)) fail(Err::NotMixing, "connecting words require a mixing matrix");
  check_symbol(B, j1);
  check_symbol(B, j2);
  const int l = B.size;
  // BFS from j1 with at least one edge; parent tracking for path recovery
  std::vector<int> parent(l, -2);
  std::queue<int> q;
  for (int j = 0; j < l; ++j)
    if (B.at(j1 - 1, j) && parent[j] == -2) {
      parent[j] = j1 - 1;
      q.push(j);
    }
  if (parent[j2 - 1] == -2) {
    while (!q.empty()) {
      int i = q.front();
      q.pop();
      if (i == j2 - 1) break;
      for (int j = 0; j < l; ++j)
        if (B.at(i, j) && parent[j] == -2) {
          parent[j] = i;
          q.push(j);
        }
      if (parent[j2 - 1] != -2) break;
    }
  }
  if (parent[j2 - 1] == -2) fail(Err::NotMixing, "no path between the given symbols");
  Word w;
  int cur = j2 - 1;
  w.push_back(cur + 1);
  while (cur != j1 - 1 || w.size() == 1) {
    cur = parent[cur];
    w.push_back(cur + 1);
    if (cur == j1 - 1) break;
  }
  std::reverse(w.begin(), w.end());
  return w;
}

int connecting_length_bound(const TransitionMatrix& B) {
  int L0 = 0;
  for (int a = 1; a <= B.size; ++a)
    for (int b = 1; b <= B.size; ++b)
      L0 = std::max(L0, int(connecting_word(B, a, b).size()));
  return L0;
}

bool bridge_feasible(const TransitionMatrix& B, int a, int b, i64 s) {
  check_symbol(B, a);
  check_symbol(B, b);
  if (s < 0) return false;
  // reachable symbol set after k edges starting from a; feasible iff b is
  // reachable in exactly s+1 edges.
  std::vector<char> cur(B.size, 0);
  cur[a - 1] = 1;
  for (i64 k = 0; k < s + 1; ++k) {
    std::vector<char> nxt(B.size, 0);
    for (int i = 0; i < B.size; ++i)
      if (cur[i])
        for (int j = 0; j < B.size; ++j)
          if (B.at(i, j)) nxt[j] = 1;
    cur.swap(nxt);
    bool any = false;
    for (char c : cur) any = any || c;
    if (!any) return false;
  }
  return cur[b - 1] != 0;
}

int bridge_feasibility_floor(const TransitionMatrix& B) {
  auto rep = validate_transition_matrix(B);
  if (!is_mixing(rep)) fail(Err::NotMixing, "bridge floor requires a mixing matrix");
  for (int s = 0; s < 4 * B.size * B.size + 4; ++s) {
    bool ok = true;
    for (int a = 1; a <= B.size && ok; ++a)
      for (int b = 1; b <= B.size && ok; ++b)
        ok = bridge_feasible(B, a, b, s);
    if (ok) {
      // mixing implies feasibility is monotone from here on; verify one step
      return s;
    }
  }
  fail(Err::BridgeInfeasible, "no uniform bridge length found (matrix not primitive?)");
}

Word bridge_word(const TransitionMatrix& B, int a, int b, i64 s) {
  check_symbol(B, a);
  check_symbol(B, b);
  if (s < 0) fail(Err::BadInput, "bridge length must be >= 0");
  if (!bridge_feasible(B, a, b, s))
    fail(Err::BridgeInfeasible, "no admissible bridge of length " + std::to_string(s) +
                                    " from " + std::to_string(a) + " to " + std::to_string(b));
  if (s == 0) return {};
  // feasible[k][j] = can reach b from symbol j+1 in exactly k edges
  std::vector<std::vector<char>> feas(std::size_t(s) + 1, std::vector<char>(B.size, 0));
  feas[0][b - 1] = 1;
  for (i64 k = 1; k <= s; ++k)
    for (int i = 0; i < B.size; ++i)
      for (int j = 0; j < B.size; ++j)
        if (B.at(i, j) && feas[std::size_t(k) - 1][j]) feas[std::size_t(k)][i] = 1;
  Word w;
  int cur = a - 1;
  for (i64 t = 0; t < s; ++t) {
    // After placing the (t+1)-th bridge symbol j, the tail j -> ... -> b has
    // s - t edges left (including the final hop onto b).
    bool placed = false;
    for (int j = 0; j < B.size && !placed; ++j)
      if (B.at(cur, j) && feas[std::size_t(s - t)][j]) {
        w.push_back(j + 1);
        cur = j;
        placed = true;
      }
    if (!placed) fail(Err::BridgeInfeasible, "bridge DP inconsistency");
  }
  return w;
}

TwoBlockRecoding two_block_square_recoding(const TransitionMatrix& B) {
  validate_transition_matrix(B);
  TwoBlockRecoding out;
  for (int a = 0; a < B.size; ++a)
    for (int b = 0; b < B.size; ++b)
      if (B.at(a, b)) out.blocks.emplace_back(a + 1, b + 1);
  const int n2 = int(out.blocks.size());
  out.B2.size = n2;
  out.B2.rows.assign(std::size_t(n2), std::vector<int>(std::size_t(n2), 0));
  for (int i = 0; i < n2; ++i)
    for (int j = 0; j < n2; ++j) {
      // (a,b) -> (c,d) iff b -> c is an allowed edge
      int b = out.blocks[std::size_t(i)].second, c = out.blocks[std::size_t(j)].first;
      if (B.at(b - 1, c - 1)) out.B2.rows[std::size_t(i)][std::size_t(j)] = 1;
    }
  return out;
}

}  // namespace ergolab
