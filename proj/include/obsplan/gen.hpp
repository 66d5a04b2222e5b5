#pragma once

// Instance generators: SAT-encoding POMDPs, the two-state contraction lower
// bound, random observable models and small named examples.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "obsplan/errors.hpp"
#include "obsplan/model.hpp"
#include "obsplan/rng.hpp"

namespace obsplan {

// ---------------------------------------------------------------------------
// CNF formulas

struct CnfFormula {
  int num_vars = 0;
  std::vector<std::vector<int>> clauses;  // signed 1-based literals
};

inline void validate_formula(const CnfFormula& f) {
  if (f.num_vars < 1) throw InvalidArgument("formula: needs at least one variable");
  if (f.clauses.empty()) throw InvalidArgument("formula: needs at least one clause");
  for (std::size_t c = 0; c < f.clauses.size(); ++c) {
    const auto& cl = f.clauses[c];
    if (cl.empty() || cl.size() > 3) {
      throw InvalidArgument("formula: clause " + std::to_string(c + 1) + " must have 1 to 3 literals");
    }
    for (int lit : cl) {
      if (lit == 0 || std::abs(lit) > f.num_vars) {
        throw InvalidArgument("formula: clause " + std::to_string(c + 1) + " has literal " + std::to_string(lit) +
                              " outside 1.." + std::to_string(f.num_vars));
      }
    }
  }
}

/// Parses DIMACS CNF ("p cnf n m", clauses terminated by 0, "c" comments,
/// optional "%" end marker).
inline CnfFormula parse_dimacs(std::istream& in) {
  CnfFormula f;
  bool header = false;
  int declared = 0;
  std::vector<int> current;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (tok == "c") continue;
    if (tok == "%") break;
    if (tok == "p") {
      std::string fmt;
      if (header || !(ls >> fmt >> f.num_vars >> declared) || fmt != "cnf") {
        throw ParseError("dimacs line " + std::to_string(lineno) + ": bad problem line");
      }
      header = true;
      continue;
    }
    if (!header) throw ParseError("dimacs line " + std::to_string(lineno) + ": clause before problem line");
    ls.clear();
    ls.str(line);
    long long lit;
    while (ls >> lit) {
      if (lit == 0) {
        f.clauses.push_back(current);
        current.clear();
      } else {
        current.push_back(static_cast<int>(lit));
      }
    }
    if (!ls.eof()) throw ParseError("dimacs line " + std::to_string(lineno) + ": expected integers");
  }
  if (!header) throw ParseError("dimacs: missing problem line");
  if (!current.empty()) f.clauses.push_back(current);
  if (static_cast<int>(f.clauses.size()) != declared) {
    throw ParseError("dimacs: header declares " + std::to_string(declared) + " clauses, found " +
                     std::to_string(f.clauses.size()));
  }
  validate_formula(f);
  return f;
}

inline CnfFormula parse_dimacs(const std::string& text) {
  std::istringstream in(text);
  return parse_dimacs(in);
}

inline CnfFormula load_dimacs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return parse_dimacs(in);
}

inline bool clause_satisfied(const std::vector<int>& clause, std::uint64_t assignment) {
  for (int lit : clause) {
    const bool value = (assignment >> (std::abs(lit) - 1)) & 1U;
    if ((lit > 0) == value) return true;
  }
  return false;
}

/// Satisfiability by enumeration; nullopt when more than 24 variables.
inline std::optional<bool> brute_force_satisfiable(const CnfFormula& f) {
  if (f.num_vars > 24) return std::nullopt;
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << f.num_vars); ++x) {
    bool all = true;
    for (const auto& c : f.clauses) {
      if (!clause_satisfied(c, x)) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

inline Json formula_json(const CnfFormula& f) { return {{"num_vars", f.num_vars}, {"clauses", f.clauses}}; }

// ---------------------------------------------------------------------------
// Shared helpers

/// Dense model entries above which generators refuse to build.
inline constexpr double kDefaultSizeBudget = 5e7;

inline double model_entries(long long S, long long A, long long O, long long H) {
  return static_cast<double>(H - 1) * (static_cast<double>(A) * S * S + static_cast<double>(S) * O + O);
}

inline void check_size(long long S, long long A, long long O, long long H, double budget) {
  const double n = model_entries(S, A, O, H);
  if (n > budget) {
    throw SizeBudgetExceeded(S, A, H, "dense model needs " + std::to_string(static_cast<long long>(n)) +
                                          " entries, budget " + std::to_string(static_cast<long long>(budget)));
  }
}

inline Pomdp empty_model(int H, int S, int A, int O) {
  Pomdp m;
  m.horizon = H;
  m.num_states = S;
  m.num_actions = A;
  m.num_observations = O;
  m.initial_belief.assign(S, 0.0);
  m.transitions.assign(H - 1, std::vector<Matrix>(A, Matrix(S, S)));
  m.emissions.assign(H - 1, Matrix(S, O));
  m.rewards.assign(H - 1, std::vector<double>(O, 0.0));
  return m;
}

/// gamma * I + (1 - gamma) * uniform over S observations.
inline Matrix identity_mix_channel(int S, double gamma) {
  Matrix m(S, S, (1.0 - gamma) / S);
  for (int x = 0; x < S; ++x) m(x, x) += gamma;
  return m;
}

/// Reveals the state with probability gamma, else the extra symbol S.
inline Matrix null_channel(int S, double gamma) {
  Matrix m(S, S + 1);
  for (int x = 0; x < S; ++x) {
    m(x, x) = gamma;
    m(x, S) = 1.0 - gamma;
  }
  return m;
}

/// Sylvester Hadamard matrix of order n (a power of two), entries +-1.
inline std::vector<std::vector<int>> sylvester_hadamard(int n) {
  if (n < 1 || (n & (n - 1)) != 0) throw InvalidArgument("hadamard order must be a power of two");
  std::vector<std::vector<int>> h{{1}};
  for (int k = 1; k < n; k *= 2) {
    std::vector<std::vector<int>> next(2 * k, std::vector<int>(2 * k));
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        next[i][j] = next[i][j + k] = next[i + k][j] = h[i][j];
        next[i + k][j + k] = -h[i][j];
      }
    }
    h = std::move(next);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Trial-based SAT instance with a gamma-observable channel

struct SatHardParams {
  double gamma = 0.25;
  std::optional<long long> trials;         // T
  std::optional<int> block_size;           // variables assigned per step
  std::optional<int> steps_per_trial;      // steps per trial
  std::optional<int> num_vars;             // pad n with unused variables
  double size_budget = kDefaultSizeBudget;
};

struct SatHardLayout {
  int n = 0, m = 0;
  long long trials = 0;
  long long default_trials = 0;
  int block_size = 0;
  int steps = 0;
  long long S = 0, A = 0, H = 0;
  double unsat_bound = 0.0;

  /// State index of (t, failed, clause, step, satisfied); t, clause and step
  /// are 1-based.
  long long state(long long t, int failed, int clause, int step, int sat) const {
    return ((((t - 1) * 2 + failed) * m + (clause - 1)) * steps + (step - 1)) * 2 + sat;
  }
};

/// ceil(2 n^3 exp(2 sqrt(gamma n))).
inline double sat_hard_default_trials(int n, double gamma) {
  return std::ceil(2.0 * n * n * n * std::exp(2.0 * std::sqrt(gamma * n)));
}

inline SatHardLayout sat_hard_layout(const CnfFormula& f, const SatHardParams& p) {
  validate_formula(f);
  if (p.num_vars && *p.num_vars < f.num_vars) {
    throw InvalidArgument("gen sat: num_vars may only pad the formula's " + std::to_string(f.num_vars) + " variables");
  }
  const int n = p.num_vars.value_or(f.num_vars);
  if (!(p.gamma >= 1.0 / n - 1e-12 && p.gamma <= 0.5)) {
    throw InvalidArgument("gen sat: gamma must lie in [1/n, 1/2] for n = " + std::to_string(n));
  }
  SatHardLayout L;
  L.n = n;  // variables beyond the formula's own are never read by a clause
  L.m = static_cast<int>(f.clauses.size());
  L.block_size = p.block_size.value_or(static_cast<int>(std::ceil(std::sqrt(p.gamma * n) - 1e-12)));
  L.steps = p.steps_per_trial.value_or(static_cast<int>(std::ceil(std::sqrt(n / p.gamma) - 1e-12)));
  if (L.block_size < 1 || L.steps < 1) throw InvalidArgument("gen sat: block size and steps must be >= 1");
  if (static_cast<long long>(L.block_size) * L.steps < n) {
    throw InvalidArgument("gen sat: block_size * steps_per_trial must cover all " + std::to_string(n) +
                          " variables");
  }
  if (L.block_size > 20) throw InvalidArgument("gen sat: block size above 20 gives too many actions");
  const double dflt = sat_hard_default_trials(n, p.gamma);
  L.default_trials = dflt > 9e18 ? -1 : static_cast<long long>(dflt);
  const double T = p.trials ? static_cast<double>(*p.trials) : dflt;
  if (T < 1) throw InvalidArgument("gen sat: trial count must be >= 1");
  L.trials = T > 9e15 ? -1 : static_cast<long long>(T);
  const double S = (T + 1) * 2.0 * L.m * L.steps * 2.0;
  const double H = T * L.steps + 1;
  L.A = 1LL << L.block_size;
  L.S = S > 9e15 ? -1 : static_cast<long long>(S);
  L.H = H > 9e15 ? -1 : static_cast<long long>(H);
  L.unsat_bound = std::pow(1.0 - std::pow(1.0 - p.gamma, L.steps) / L.m, T);
  return L;
}

/// Trial-based reduction. State (t, failed, clause, step, satisfied): each
/// trial draws a clause, the agent assigns `block_size` variables per step
/// over `steps_per_trial` steps, and the trial fails if the clause stays
/// unsatisfied. Observations are the state through a gamma identity-mix
/// channel, except at the last step where they are exact so that the final
/// reward 1 - failed is a function of the observation.
inline Pomdp gen_sat_hard(const CnfFormula& f, const SatHardParams& p = {}) {
  const SatHardLayout L = sat_hard_layout(f, p);
  if (L.S < 0 || L.H < 0 || L.H > 1'000'000 || L.S > 1'000'000) {
    throw SizeBudgetExceeded(L.S, L.A, L.H, "trial count too large to materialize");
  }
  check_size(L.S, L.A, L.S, L.H, p.size_budget);
  const int S = static_cast<int>(L.S), A = static_cast<int>(L.A), H = static_cast<int>(L.H);
  const int m = L.m;
  Pomdp model = empty_model(H, S, A, S);

  std::vector<Matrix> kernels(A, Matrix(S, S));
  for (int a = 0; a < A; ++a) {
    Matrix& K = kernels[a];
    for (long long t = 1; t <= L.trials + 1; ++t) {
      for (int fail = 0; fail < 2; ++fail) {
        for (int i = 1; i <= m; ++i) {
          for (int j = 1; j <= L.steps; ++j) {
            for (int s = 0; s < 2; ++s) {
              const auto x = static_cast<int>(L.state(t, fail, i, j, s));
              if (t == L.trials + 1) {
                K(x, x) = 1.0;
                continue;
              }
              // Does action a, assigning variables (j-1)*block+1 .. j*block,
              // satisfy clause i?
              int g = 0;
              for (int lit : f.clauses[i - 1]) {
                const int var = std::abs(lit);
                const int k = var - 1 - (j - 1) * L.block_size;
                if (k < 0 || k >= L.block_size) continue;
                const bool value = (a >> k) & 1;
                if ((lit > 0) == value) g = 1;
              }
              const int sat = s | g;
              if (j < L.steps) {
                K(x, static_cast<int>(L.state(t, fail, i, j + 1, sat))) = 1.0;
              } else {
                const int nf = fail | (1 - sat);
                for (int i2 = 1; i2 <= m; ++i2) K(x, static_cast<int>(L.state(t + 1, nf, i2, 1, 0))) += 1.0 / m;
              }
            }
          }
        }
      }
    }
  }
  for (int h = 0; h < H - 1; ++h) model.transitions[h] = kernels;

  const Matrix mix = identity_mix_channel(S, p.gamma);
  for (int i = 0; i + 1 < H - 1; ++i) model.emissions[i] = mix;
  model.emissions[H - 2] = Matrix::identity(S);
  for (int i = 1; i <= m; ++i) {
    model.initial_belief[L.state(1, 0, i, 1, 0)] = 1.0 / m;
    for (int j = 1; j <= L.steps; ++j)
      for (int s = 0; s < 2; ++s) model.rewards[H - 2][L.state(L.trials + 1, 0, i, j, s)] = 1.0;
  }

  std::vector<double> step_gamma(H - 1, p.gamma);
  step_gamma.back() = 1.0;
  const auto sat = brute_force_satisfiable(f);
  model.metadata = {
      {"generator", "sat"},
      {"formula", formula_json(f)},
      {"gamma", p.gamma},
      {"num_vars", L.n},
      {"trials", L.trials},
      {"default_trials", L.default_trials},
      {"block_size", L.block_size},
      {"steps_per_trial", L.steps},
      {"state_layout", "index = ((((t-1)*2 + failed)*m + (clause-1))*steps + (step-1))*2 + satisfied; t in 1..T+1"},
      {"action_layout", "bit k of the action assigns variable (step-1)*block_size + k + 1"},
      {"emission_gamma", step_gamma},
      {"certificate",
       {{"satisfiable", sat ? Json(*sat) : Json(nullptr)},
        {"value_if_satisfiable", 1.0},
        {"value_upper_bound_if_unsatisfiable", L.unsat_bound}}}};
  return model;
}

// ---------------------------------------------------------------------------
// Weakly observable SAT instance from Hadamard rows

/// State (pair-index j in [2m], step i in [n+1], satisfied b); clause c owns
/// j = 2c-1 and 2c. Observation (X, i, b) with X uniform on the + entries
/// (odd j) or - entries (even j) of Hadamard row c. Action a at step i sets
/// x_i = a. The final reward is b, read off the observation.
inline Pomdp gen_hadamard_sat(const CnfFormula& f, double size_budget = kDefaultSizeBudget) {
  validate_formula(f);
  const int n = f.num_vars, m = static_cast<int>(f.clauses.size());
  int N = 1;
  while (N < m + 1) N *= 2;
  const long long S = 2LL * m * (n + 1) * 2, O = static_cast<long long>(N) * (n + 1) * 2, H = n + 1;
  check_size(S, 2, O, H, size_budget);
  const auto had = sylvester_hadamard(N);
  auto state = [&](int j, int i, int b) { return ((j - 1) * (n + 1) + (i - 1)) * 2 + b; };
  auto obs = [&](int X, int i, int b) { return ((X - 1) * (n + 1) + (i - 1)) * 2 + b; };

  Pomdp model = empty_model(static_cast<int>(H), static_cast<int>(S), 2, static_cast<int>(O));
  for (int j = 1; j <= 2 * m; ++j) model.initial_belief[state(j, 1, 0)] = 1.0 / (2 * m);
  for (int h = 1; h < H; ++h) {
    for (int a = 0; a < 2; ++a) {
      Matrix& K = model.transitions[h - 1][a];
      for (int j = 1; j <= 2 * m; ++j) {
        const auto& clause = f.clauses[(j - 1) / 2];
        for (int i = 1; i <= n + 1; ++i) {
          for (int b = 0; b < 2; ++b) {
            if (i == n + 1) {
              K(state(j, i, b), state(j, i, b)) = 1.0;
              continue;
            }
            int g = 0;
            for (int lit : clause)
              if (std::abs(lit) == i && (lit > 0) == (a == 1)) g = 1;
            K(state(j, i, b), state(j, i + 1, b | g)) = 1.0;
          }
        }
      }
    }
  }
  for (int h = 2; h <= H; ++h) {
    Matrix& E = model.emissions[h - 2];
    for (int j = 1; j <= 2 * m; ++j) {
      const auto& row = had[(j + 1) / 2];  // row c, skipping the all-ones row 0
      const int want = j % 2 == 1 ? 1 : -1;
      int count = 0;
      for (int X = 0; X < N; ++X) count += row[X] == want;
      for (int i = 1; i <= n + 1; ++i)
        for (int b = 0; b < 2; ++b)
          for (int X = 1; X <= N; ++X)
            if (row[X - 1] == want) E(state(j, i, b), obs(X, i, b)) = 1.0 / count;
    }
  }
  for (int X = 1; X <= N; ++X)
    for (int i = 1; i <= n + 1; ++i) model.rewards[H - 2][obs(X, i, 1)] = 1.0;

  const auto sat = brute_force_satisfiable(f);
  model.metadata = {
      {"generator", "hadamard"},
      {"formula", formula_json(f)},
      {"hadamard_order", N},
      {"state_layout", "index = ((j-1)*(n+1) + (i-1))*2 + b; j in 1..2m, i in 1..n+1"},
      {"observation_layout", "index = ((X-1)*(n+1) + (i-1))*2 + b; X in 1..N"},
      {"weak_gamma", m >= 2 ? 1.0 : 2.0},
      {"certificate",
       {{"satisfiable", sat ? Json(*sat) : Json(nullptr)},
        {"value_if_satisfiable", 1.0},
        {"value_upper_bound_if_unsatisfiable", n <= 2 ? Json(1.0 - 1.0 / m) : Json(nullptr)},
        {"argued_bound", 1.0 - 1.0 / m},
        {"argued_bound_note",
         "1 - 1/m treats the observations as independent of the clause. Two observations from the same "
         "state are correlated through the Hadamard row, so from n = 3 on a policy can beat it "
         "(e.g. (x3)(-x3)(x1) has value 5/6 > 2/3). With n <= 2 at most one observation precedes "
         "a decision and the bound holds."}}}};
  return model;
}

// ---------------------------------------------------------------------------
// Two-state contraction lower bound

/// Identity dynamics, b_1 = (1, 0), channel rows (1/2 + gamma, 1/2 - gamma)
/// and (1/2 - gamma, 1/2 + gamma), no rewards. The slow-decay guarantee needs
/// gamma < 1/10; any gamma in (0, 1/2) builds a valid model.
inline Pomdp gen_contraction_lb(double gamma, int H, int num_actions = 1) {
  if (!(gamma > 0.0 && gamma < 0.5)) throw InvalidArgument("gen contraction-lb: gamma must lie in (0, 1/2)");
  if (H < 2) throw InvalidArgument("gen contraction-lb: horizon must be >= 2");
  if (num_actions < 1) throw InvalidArgument("gen contraction-lb: needs at least one action");
  Pomdp m = empty_model(H, 2, num_actions, 2);
  m.initial_belief = {1.0, 0.0};
  for (auto& per_action : m.transitions)
    for (auto& t : per_action) t = Matrix::identity(2);
  Matrix em(2, 2);
  em(0, 0) = em(1, 1) = 0.5 + gamma;
  em(0, 1) = em(1, 0) = 0.5 - gamma;
  for (auto& e : m.emissions) e = em;
  m.metadata = {{"generator", "contraction-lb"},
                {"gamma", gamma},
                {"emission_gamma", std::vector<double>(H - 1, 2.0 * gamma)},
                {"slow_decay_regime", gamma < 0.1}};
  return m;
}

// ---------------------------------------------------------------------------
// Random observable instance

/// O = S with identity-mix channels of parameter gamma0 at every step;
/// Dirichlet(1) transition rows and initial belief; rewards uniform in [0, 1].
inline Pomdp gen_random_observable(int S, int A, int H, double gamma0, std::uint64_t seed) {
  if (S < 1 || A < 1 || H < 2) throw InvalidArgument("gen random: need S >= 1, A >= 1, H >= 2");
  if (!(gamma0 > 0.0 && gamma0 <= 1.0)) throw InvalidArgument("gen random: gamma must lie in (0, 1]");
  Rng rng = stream(seed, 0);
  Pomdp m = empty_model(H, S, A, S);
  m.initial_belief = dirichlet(rng, S);
  for (auto& per_action : m.transitions) {
    for (auto& t : per_action) {
      for (int x = 0; x < S; ++x) {
        const auto row = dirichlet(rng, S);
        std::copy(row.begin(), row.end(), t.row(x).begin());
      }
    }
  }
  const Matrix ch = gamma0 == 1.0 ? Matrix::identity(S) : identity_mix_channel(S, gamma0);
  for (auto& e : m.emissions) e = ch;
  for (auto& r : m.rewards)
    for (double& v : r) v = uniform01(rng);
  m.metadata = {{"generator", "random"},
                {"seed", seed},
                {"gamma", gamma0},
                {"emission_gamma", std::vector<double>(H - 1, S == 1 ? 1.0 : gamma0)}};
  return m;
}

// ---------------------------------------------------------------------------
// Named examples

struct ExampleParams {
  int m = 4;             // large-net size; null-channel state count
  double eps = 0.1;      // divergence-increase, no-linear-rate
  double gamma = 0.25;   // no-linear-rate channel bias; null-channel uses 0.3 unless set
  std::optional<double> null_gamma;
};

inline const std::vector<std::string>& example_names() {
  static const std::vector<std::string> names = {"large-net", "divergence-increase", "no-linear-rate",
                                                 "null-channel"};
  return names;
}

inline Pomdp gen_example(const std::string& name, const ExampleParams& p = {}) {
  if (name == "large-net") {
    const int k = p.m;
    if (k < 2) throw InvalidArgument("large-net: m must be >= 2");
    check_size(k, static_cast<long long>(k) * k, k + 1, k, kDefaultSizeBudget);
    Pomdp m = empty_model(k, k, k * k, k + 1);
    m.initial_belief.assign(k, 1.0 / k);
    for (auto& per_action : m.transitions) {
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
          Matrix& t = per_action[i * k + j];
          for (int x = 0; x < k; ++x) t(x, x == i ? j : x) = 1.0;
        }
      }
    }
    for (auto& e : m.emissions) e = null_channel(k, 0.5);
    m.metadata = {{"example", name},
                  {"m", k},
                  {"action_layout", "action i*m + j moves state i to state j; other states stay"},
                  {"emission_gamma", std::vector<double>(k - 1, 0.5)},
                  {"claim", "every belief with m*P(x) integral is reachable through null observations, so an "
                            "epsilon-net over reachable beliefs needs exp(Omega(m)) points"}};
    return m;
  }
  if (name == "divergence-increase") {
    const double e = p.eps;
    if (!(e > 0.0 && e < 0.5)) throw InvalidArgument("divergence-increase: eps must lie in (0, 1/2)");
    Pomdp m = empty_model(2, 2, 1, 2);
    m.initial_belief = {1.0 - e * e, e * e};
    m.transitions[0][0] = Matrix::identity(2);
    Matrix& em = m.emissions[0];
    em(0, 0) = em(1, 1) = 1.0 - e;
    em(0, 1) = em(1, 0) = e;
    m.metadata = {{"example", name},
                  {"eps", e},
                  {"b_prime", {0.5, 0.5}},
                  {"claim", "KL(b||b') <= log 2 but after observing symbol 1 the KL grows like log(1/eps)"}};
    return m;
  }
  if (name == "no-linear-rate") {
    const double g = p.gamma, e = p.eps;
    if (!(g > 0.0 && g < 0.5)) throw InvalidArgument("no-linear-rate: gamma must lie in (0, 1/2)");
    if (!(e > 0.0 && e < 1.0)) throw InvalidArgument("no-linear-rate: eps must lie in (0, 1)");
    Pomdp m = empty_model(2, 2, 1, 2);
    m.initial_belief = {1.0, 0.0};
    m.transitions[0][0] = Matrix::identity(2);
    Matrix& em = m.emissions[0];
    em(0, 0) = em(1, 1) = 0.5 + g;
    em(0, 1) = em(1, 0) = 0.5 - g;
    m.metadata = {{"example", name},
                  {"gamma", g},
                  {"eps", e},
                  {"b_prime", {1.0 - e, e}},
                  {"emission_gamma", {2.0 * g}},
                  {"claim", "the one-step expected KL decrement is quadratic in KL(b||b')"}};
    return m;
  }
  if (name == "null-channel") {
    const int S = p.m;
    const double g = p.null_gamma.value_or(0.3);
    if (S < 1) throw InvalidArgument("null-channel: needs at least one state");
    if (!(g > 0.0 && g <= 1.0)) throw InvalidArgument("null-channel: gamma must lie in (0, 1]");
    Pomdp m = empty_model(3, S, 1, S + 1);
    m.initial_belief.assign(S, 1.0 / S);
    for (auto& per_action : m.transitions) per_action[0] = Matrix::identity(S);
    for (auto& e : m.emissions) e = null_channel(S, g);
    m.metadata = {{"example", name},
                  {"gamma", g},
                  {"emission_gamma", std::vector<double>(2, S == 1 ? 1.0 : g)},
                  {"claim", "revealing the state with probability gamma, else a null symbol, is gamma-observable"}};
    return m;
  }
  throw UnknownExample(name);
}

}  // namespace obsplan
