#pragma once

// Dense two-phase simplex with Bland's rule. Intended for the small LPs
// behind the observability computation; no attempt at sparse or large-scale
// efficiency.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "obsplan/errors.hpp"

namespace obsplan {

enum class Sense { LessEqual, GreaterEqual, Equal };

struct LpRow {
  std::vector<double> coeffs;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

/// minimize cost . x  subject to rows and lower <= x <= upper. Bounds default
/// to [0, +inf); use -inf / +inf for free directions.
struct LpProblem {
  int num_vars = 0;
  std::vector<double> cost;
  std::vector<LpRow> rows;
  std::vector<double> lower;  // empty means all 0
  std::vector<double> upper;  // empty means all +inf
};

enum class LpStatus { Optimal, Infeasible, Unbounded, MaxIterations };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::MaxIterations: return "max-iterations";
  }
  return "?";
}

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  long long iterations = 0;
  /// Phase-2 reduced costs of the standard-form columns that carry the
  /// original variables (after shifting and splitting). All >= -tol at an
  /// optimum.
  std::vector<double> reduced_costs;
};

inline constexpr double kPivotTolerance = 1e-10;

namespace detail {

class Tableau {
 public:
  Tableau(int rows, int cols) : m_(rows), n_(cols), a_(static_cast<std::size_t>(rows + 1) * (cols + 1), 0.0) {}

  double& at(int r, int c) { return a_[static_cast<std::size_t>(r) * (n_ + 1) + c]; }
  double& rhs(int r) { return at(r, n_); }
  double& cost(int c) { return at(m_, c); }
  double& objective() { return at(m_, n_); }

  void pivot(int r, int c) {
    const double p = at(r, c);
    for (int j = 0; j <= n_; ++j) at(r, j) /= p;
    at(r, c) = 1.0;
    for (int i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      for (int j = 0; j <= n_; ++j) at(i, j) -= f * at(r, j);
      at(i, c) = 0.0;
    }
  }

  int rows() const { return m_; }
  int cols() const { return n_; }

 private:
  int m_, n_;
  std::vector<double> a_;
};

// Runs Bland's-rule iterations on columns [0, allowed). Returns Optimal,
// Unbounded or MaxIterations.
inline LpStatus run_simplex(Tableau& t, std::vector<int>& basis, int allowed, long long& iters, long long cap) {
  while (true) {
    int enter = -1;
    for (int j = 0; j < allowed; ++j) {
      if (t.cost(j) < -kPivotTolerance) {
        enter = j;
        break;
      }
    }
    if (enter < 0) return LpStatus::Optimal;
    if (iters >= cap) return LpStatus::MaxIterations;
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < t.rows(); ++i) {
      const double coef = t.at(i, enter);
      if (coef <= kPivotTolerance) continue;
      // Exact minimum ratio. A tolerance here lets a row with a slightly
      // larger ratio leave, and with large column entries that drives other
      // right-hand sides visibly negative.
      const double ratio = std::max(t.rhs(i), 0.0) / coef;
      if (leave < 0 || ratio < best || (ratio == best && basis[i] < basis[leave])) {
        best = ratio;
        leave = i;
      }
    }
    if (leave < 0) return LpStatus::Unbounded;
    t.pivot(leave, enter);
    basis[leave] = enter;
    for (int i = 0; i < t.rows(); ++i) t.rhs(i) = std::max(t.rhs(i), 0.0);
    ++iters;
  }
}

// Rebuilds the tableau for `basis` from the original rows by Gauss-Jordan
// with partial pivoting, then recomputes the cost row for `cost`. Long pivot
// sequences on badly scaled columns accumulate error that this discards.
inline void refactor(Tableau& t, const Tableau& orig, std::vector<int>& basis, const std::vector<double>& cost) {
  t = orig;
  const int m = t.rows(), n = t.cols();
  std::vector<int> cols = basis;
  std::vector<char> used(m, 0);
  for (int c : cols) {
    int best = -1;
    for (int r = 0; r < m; ++r) {
      if (used[r]) continue;
      if (best < 0 || std::abs(t.at(r, c)) > std::abs(t.at(best, c))) best = r;
    }
    if (best < 0 || std::abs(t.at(best, c)) <= kPivotTolerance) continue;
    t.pivot(best, c);
    used[best] = 1;
    basis[best] = c;
  }
  for (int i = 0; i < m; ++i) t.rhs(i) = std::max(t.rhs(i), 0.0);
  for (int j = 0; j <= n; ++j) t.cost(j) = j < n ? cost[j] : 0.0;
  for (int i = 0; i < m; ++i) {
    const double cb = cost[basis[i]];
    if (cb == 0.0) continue;
    for (int j = 0; j <= n; ++j) t.cost(j) -= cb * t.at(i, j);
  }
}

// Simplex passes separated by refactorizations, until the refreshed cost row
// confirms optimality.
inline LpStatus solve_phase(Tableau& t, const Tableau& orig, std::vector<int>& basis, const std::vector<double>& cost,
                            int allowed, long long& iters, long long cap) {
  refactor(t, orig, basis, cost);
  for (int round = 0;; ++round) {
    const LpStatus st = run_simplex(t, basis, allowed, iters, cap);
    if (st != LpStatus::Optimal) return st;
    refactor(t, orig, basis, cost);
    bool done = true;
    for (int j = 0; j < allowed; ++j) done = done && t.cost(j) >= -kPivotTolerance;
    if (done || round >= 8) return LpStatus::Optimal;
  }
}

}  // namespace detail

/// Solves the LP. `max_iterations` <= 0 means 1000 * (rows + vars).
inline LpResult lp_solve(const LpProblem& p, long long max_iterations = 0) {
  const int nv = p.num_vars;
  if (static_cast<int>(p.cost.size()) != nv) throw InvalidArgument("lp_solve: cost length mismatch");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> lo = p.lower.empty() ? std::vector<double>(nv, 0.0) : p.lower;
  std::vector<double> hi = p.upper.empty() ? std::vector<double>(nv, inf) : p.upper;
  if (static_cast<int>(lo.size()) != nv || static_cast<int>(hi.size()) != nv) {
    throw InvalidArgument("lp_solve: bound length mismatch");
  }

  // Standard form: x_i = lo_i + y_i (finite lo), x_i = hi_i - y_i (only hi
  // finite), or x_i = y+ - y- (free). Each original variable maps to one or
  // two nonnegative columns with signs.
  struct Map {
    int col;
    int neg_col;  // -1 unless free
    double sign;
    double offset;
  };
  std::vector<Map> map(nv);
  int ncols = 0;
  for (int i = 0; i < nv; ++i) {
    if (std::isfinite(lo[i])) {
      map[i] = {ncols++, -1, 1.0, lo[i]};
    } else if (std::isfinite(hi[i])) {
      map[i] = {ncols++, -1, -1.0, hi[i]};
    } else {
      map[i] = {ncols, ncols + 1, 1.0, 0.0};
      ncols += 2;
    }
  }

  struct StdRow {
    std::vector<double> c;
    Sense sense;
    double rhs;
  };
  std::vector<StdRow> rows;
  auto add_row = [&](const std::vector<double>& coeffs, Sense sense, double rhs) {
    StdRow r{std::vector<double>(ncols, 0.0), sense, rhs};
    for (int i = 0; i < nv; ++i) {
      const double a = coeffs[i];
      if (a == 0.0) continue;
      r.rhs -= a * map[i].offset;
      r.c[map[i].col] += a * map[i].sign;
      if (map[i].neg_col >= 0) r.c[map[i].neg_col] -= a;
    }
    rows.push_back(std::move(r));
  };
  for (const auto& row : p.rows) {
    if (static_cast<int>(row.coeffs.size()) != nv) throw InvalidArgument("lp_solve: row length mismatch");
    add_row(row.coeffs, row.sense, row.rhs);
  }
  for (int i = 0; i < nv; ++i) {
    if (std::isfinite(lo[i]) && std::isfinite(hi[i])) {
      if (hi[i] < lo[i]) return {LpStatus::Infeasible, {}, 0.0, 0, {}};
      std::vector<double> e(nv, 0.0);
      e[i] = 1.0;
      add_row(e, Sense::LessEqual, hi[i]);
    }
  }
  for (auto& r : rows) {
    if (r.rhs < 0.0) {
      for (double& v : r.c) v = -v;
      r.rhs = -r.rhs;
      if (r.sense == Sense::LessEqual) {
        r.sense = Sense::GreaterEqual;
      } else if (r.sense == Sense::GreaterEqual) {
        r.sense = Sense::LessEqual;
      }
    }
  }

  const int m = static_cast<int>(rows.size());
  int nslack = 0, nart = 0;
  for (const auto& r : rows) {
    if (r.sense != Sense::Equal) ++nslack;
    if (r.sense != Sense::LessEqual) ++nart;
  }
  const int n = ncols + nslack + nart;
  const int first_art = ncols + nslack;
  detail::Tableau t(m, n);
  std::vector<int> basis(m);
  int s = ncols, art = first_art;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < ncols; ++j) t.at(i, j) = rows[i].c[j];
    t.rhs(i) = rows[i].rhs;
    if (rows[i].sense == Sense::LessEqual) {
      t.at(i, s) = 1.0;
      basis[i] = s++;
    } else {
      if (rows[i].sense == Sense::GreaterEqual) t.at(i, s++) = -1.0;
      t.at(i, art) = 1.0;
      basis[i] = art++;
    }
  }

  const detail::Tableau orig = t;
  const long long cap = max_iterations > 0 ? max_iterations : 1000LL * (m + nv);
  long long iters = 0;

  // Phase 1: minimize the sum of artificials.
  if (nart > 0) {
    std::vector<double> c1(n, 0.0);
    for (int j = first_art; j < n; ++j) c1[j] = 1.0;
    const LpStatus st = detail::solve_phase(t, orig, basis, c1, n, iters, cap);
    if (st == LpStatus::MaxIterations) return {st, {}, 0.0, iters, {}};
    if (-t.objective() > 1e-9) return {LpStatus::Infeasible, {}, 0.0, iters, {}};
    for (int i = 0; i < m; ++i) {
      if (basis[i] < first_art) continue;
      for (int j = 0; j < first_art; ++j) {
        if (std::abs(t.at(i, j)) > kPivotTolerance) {
          t.pivot(i, j);
          basis[i] = j;
          break;
        }
      }
    }
  }

  // Phase 2 over non-artificial columns.
  std::vector<double> c(n, 0.0);
  for (int i = 0; i < nv; ++i) {
    c[map[i].col] += p.cost[i] * map[i].sign;
    if (map[i].neg_col >= 0) c[map[i].neg_col] -= p.cost[i];
  }
  const LpStatus st = detail::solve_phase(t, orig, basis, c, first_art, iters, cap);
  if (st != LpStatus::Optimal) return {st, {}, 0.0, iters, {}};

  std::vector<double> y(n, 0.0);
  for (int i = 0; i < m; ++i) y[basis[i]] = t.rhs(i);
  LpResult res;
  res.status = LpStatus::Optimal;
  res.iterations = iters;
  res.x.resize(nv);
  res.objective = 0.0;
  for (int i = 0; i < nv; ++i) {
    double v = map[i].offset + map[i].sign * y[map[i].col];
    if (map[i].neg_col >= 0) v -= y[map[i].neg_col];
    res.x[i] = v;
    res.objective += p.cost[i] * v;
  }
  res.reduced_costs.resize(ncols);
  for (int j = 0; j < ncols; ++j) res.reduced_costs[j] = t.cost(j);
  return res;
}

}  // namespace obsplan
