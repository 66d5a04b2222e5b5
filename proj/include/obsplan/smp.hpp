#pragma once

// Short-memory planning: backward induction over windows of the last L
// actions and observations, with beliefs approximated by filtering the window
// from a uniform prior.
//
// Window key encoding (stable; used in policy files). For a window of length
// t with actions (a_1..a_t) and observations (o_1..o_t), oldest first:
//   key = (sum_k a_k * A^(t-k)) * O^t + sum_k o_k * O^(t-k)
// i.e. base-A action digits, most significant oldest, followed by base-O
// observation digits. The window at stage h has length min(L, h-1).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "obsplan/belief.hpp"
#include "obsplan/errors.hpp"
#include "obsplan/exactplan.hpp"
#include "obsplan/model.hpp"
#include "obsplan/parallel.hpp"
#include "obsplan/policy.hpp"

namespace obsplan {

enum class SmpMode { Dense, Reachable };

inline const char* to_string(SmpMode m) { return m == SmpMode::Dense ? "dense" : "reachable"; }

inline SmpMode parse_smp_mode(const std::string& s) {
  if (s == "dense") return SmpMode::Dense;
  if (s == "reachable") return SmpMode::Reachable;
  throw InvalidArgument("unknown mode '" + s + "' (expected dense or reachable)");
}

inline constexpr double kDefaultTableBudget = 1e8;

using WindowKey = std::uint64_t;

/// Number of windows of length t: (A*O)^t.
inline double window_count(int A, int O, int t) { return std::pow(static_cast<double>(A) * O, t); }

inline WindowKey encode_window(const HistoryWindow& w, int A, int O) {
  WindowKey act = 0, obs = 0, scale = 1;
  for (int k = 0; k < w.length(); ++k) {
    act = act * A + static_cast<WindowKey>(w.actions[k]);
    obs = obs * O + static_cast<WindowKey>(w.observations[k]);
    scale *= static_cast<WindowKey>(O);
  }
  return act * scale + obs;
}

inline HistoryWindow decode_window(WindowKey key, int stage, int t, int A, int O) {
  HistoryWindow w;
  w.stage = stage;
  w.actions.resize(t);
  w.observations.resize(t);
  for (int k = t - 1; k >= 0; --k) {
    w.observations[k] = static_cast<int>(key % O);
    key /= O;
  }
  for (int k = t - 1; k >= 0; --k) {
    w.actions[k] = static_cast<int>(key % A);
    key /= A;
  }
  return w;
}

/// Window at stage h+1 after appending (a, y), truncated to length L.
inline HistoryWindow shift_window(const HistoryWindow& w, int a, int y, int L) {
  HistoryWindow next = w;
  next.stage = w.stage + 1;
  next.actions.push_back(a);
  next.observations.push_back(y);
  if (next.length() > L) {
    next.actions.erase(next.actions.begin());
    next.observations.erase(next.observations.begin());
  }
  return next;
}

/// Table for one stage. In dense mode `keys` is empty and entry i has key i.
struct SmpStageTable {
  int stage = 1;
  int window_length = 0;
  std::vector<WindowKey> keys;
  std::vector<int> actions;
  std::vector<double> q;  // entries x A, row-major

  std::size_t size() const noexcept { return actions.size(); }

  /// Entry index for a key, or nullopt when absent.
  std::optional<std::size_t> find(WindowKey key) const {
    if (keys.empty()) {
      if (key < actions.size()) return static_cast<std::size_t>(key);
      return std::nullopt;
    }
    auto it = std::lower_bound(keys.begin(), keys.end(), key);
    if (it == keys.end() || *it != key) return std::nullopt;
    return static_cast<std::size_t>(it - keys.begin());
  }

  WindowKey key_at(std::size_t i) const { return keys.empty() ? static_cast<WindowKey>(i) : keys[i]; }

  double value_at(std::size_t i, int A) const { return q[i * A + actions[i]]; }
};

struct SmpPolicy {
  int window_length = 0;
  SmpMode mode = SmpMode::Dense;
  int horizon = 0;
  int num_actions = 0;
  int num_observations = 0;
  double value_estimate = 0.0;
  std::vector<SmpStageTable> stages;  // stages[h-1] for h in 1..H-1

  const SmpStageTable& stage(int h) const { return stages.at(h - 1); }
  std::size_t num_entries() const {
    std::size_t n = 0;
    for (const auto& s : stages) n += s.size();
    return n;
  }
};

namespace detail {

// Q-hat_h(w, .) from the stage-(h+1) table. Windows whose approximate belief
// is unreachable from the uniform prior get all-zero Q. Children missing from
// `next` contribute only their immediate reward (used by the fallback rule).
inline void smp_q(const Pomdp& m, const HistoryWindow& w, int L, const SmpStageTable* next, double* q_out) {
  const int A = m.num_actions, O = m.num_observations, h = w.stage;
  Vec bhat;
  try {
    bhat = approx_belief(m, w).probs;
  } catch (const ImpossibleObservation&) {
    std::fill(q_out, q_out + A, 0.0);
    return;
  }
  const Matrix& em = m.emission(h + 1);
  const auto& r = m.reward(h + 1);
  for (int a = 0; a < A; ++a) {
    const Vec qy = channel_obs_dist(em, push_forward(m.transition(h, a), bhat));
    double total = 0.0;
    for (int y = 0; y < O; ++y) {
      if (!(qy[y] > kImpossibleThreshold)) continue;
      double cont = 0.0;
      if (next != nullptr) {
        const WindowKey child = encode_window(shift_window(w, a, y, L), A, O);
        if (auto idx = next->find(child)) cont = next->value_at(*idx, A);
      }
      total += qy[y] * (r[y] + cont);
    }
    q_out[a] = total;
  }
}

inline int argmax_lowest(const double* q, int n) {
  int best = 0;
  for (int a = 1; a < n; ++a)
    if (q[a] > q[best]) best = a;
  return best;
}

inline void fill_stage(const Pomdp& m, int L, SmpStageTable& table, const SmpStageTable* next, int threads) {
  const int A = m.num_actions, O = m.num_observations;
  const std::size_t n = table.size();
  table.q.assign(n * A, 0.0);
  parallel_for(n, threads, [&](std::size_t i) {
    const HistoryWindow w = decode_window(table.key_at(i), table.stage, table.window_length, A, O);
    double* q = table.q.data() + i * A;
    smp_q(m, w, L, next, q);
    table.actions[i] = argmax_lowest(q, A);
  });
}

// Sorted, de-duplicated successor keys of a stage under positive approximate
// observation probability.
inline std::vector<WindowKey> successors(const Pomdp& m, int L, const SmpStageTable& table, int threads) {
  const int A = m.num_actions, O = m.num_observations, h = table.stage;
  std::vector<std::vector<WindowKey>> per(table.size());
  parallel_for(table.size(), threads, [&](std::size_t i) {
    const HistoryWindow w = decode_window(table.key_at(i), h, table.window_length, A, O);
    Vec bhat;
    try {
      bhat = approx_belief(m, w).probs;
    } catch (const ImpossibleObservation&) {
      return;
    }
    for (int a = 0; a < A; ++a) {
      const Vec qy = channel_obs_dist(m.emission(h + 1), push_forward(m.transition(h, a), bhat));
      for (int y = 0; y < O; ++y)
        if (qy[y] > kImpossibleThreshold) per[i].push_back(encode_window(shift_window(w, a, y, L), A, O));
    }
  });
  std::vector<WindowKey> out;
  for (auto& v : per) out.insert(out.end(), v.begin(), v.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

/// Dense-mode entry estimate (A*O)^L * H * A * O used for the budget check.
inline double smp_dense_estimate(const Pomdp& m, int L) {
  const int t = std::min(L, m.horizon - 1);
  return window_count(m.num_actions, m.num_observations, t) * m.horizon * m.num_actions * m.num_observations;
}

struct SmpOptions {
  SmpMode mode = SmpMode::Dense;
  double budget = kDefaultTableBudget;
  int threads = 1;
};

/// Plans with window length L. Dense mode fills every window; reachable mode
/// only windows reachable with positive probability under the approximate
/// beliefs (a superset of those reachable in the model under any policy).
inline SmpPolicy smp_plan(const Pomdp& m, int L, const SmpOptions& opt = {}) {
  if (L < 0) throw InvalidArgument("smp_plan: window length must be >= 0");
  require_valid(m);
  const int H = m.horizon, A = m.num_actions, O = m.num_observations;
  SmpPolicy p;
  p.window_length = L;
  p.mode = opt.mode;
  p.horizon = H;
  p.num_actions = A;
  p.num_observations = O;
  p.stages.resize(H - 1);
  for (int h = 1; h < H; ++h) {
    p.stages[h - 1].stage = h;
    p.stages[h - 1].window_length = std::min(L, h - 1);
  }

  if (opt.mode == SmpMode::Dense) {
    const double estimate = smp_dense_estimate(m, L);
    if (estimate > opt.budget) throw BudgetExceeded("smp_plan (dense): table entries", estimate, opt.budget);
    for (auto& st : p.stages) {
      st.actions.assign(static_cast<std::size_t>(window_count(A, O, st.window_length)), 0);
    }
  } else {
    double total = 1.0;
    p.stages[0].keys = {0};
    p.stages[0].actions.assign(1, 0);
    for (int h = 1; h + 1 < H; ++h) {
      auto next = detail::successors(m, L, p.stages[h - 1], opt.threads);
      total += static_cast<double>(next.size());
      if (total * A * O > opt.budget) {
        throw BudgetExceeded("smp_plan (reachable): table entries so far", total * A * O, opt.budget);
      }
      p.stages[h].keys = std::move(next);
      p.stages[h].actions.assign(p.stages[h].keys.size(), 0);
    }
  }

  for (int h = H - 1; h >= 1; --h) {
    const SmpStageTable* next = h + 1 < H ? &p.stages[h] : nullptr;
    detail::fill_stage(m, L, p.stages[h - 1], next, opt.threads);
  }
  p.value_estimate = p.stages[0].value_at(0, A);
  return p;
}

struct SmpDecision {
  int action = 0;
  bool fallback = false;
};

/// Action of the policy at a full history: the table entry for its last
/// min(L, h-1) steps, or one-step greedy on the recomputed approximate belief
/// when the window is missing (reachable mode only).
inline SmpDecision smp_act(const SmpPolicy& policy, const Pomdp& m, const History& history) {
  const int h = history.stage();
  if (h < 1 || h >= policy.horizon) throw InvalidArgument("smp_act: stage outside 1..H-1");
  const HistoryWindow w = window_of(history, policy.window_length);
  const SmpStageTable& table = policy.stage(h);
  if (auto idx = table.find(encode_window(w, policy.num_actions, policy.num_observations))) {
    return {table.actions[*idx], false};
  }
  std::vector<double> q(policy.num_actions);
  const SmpStageTable* next = h + 1 < policy.horizon ? &policy.stage(h + 1) : nullptr;
  detail::smp_q(m, w, policy.window_length, next, q.data());
  return {detail::argmax_lowest(q.data(), policy.num_actions), true};
}

/// Policy adapter for evaluation and simulation. Counts fallbacks.
class SmpExecutor : public DeterministicPolicy {
 public:
  SmpExecutor(const SmpPolicy& policy, const Pomdp& m) : policy_(&policy), model_(&m) {}

  int act(const History& history) const override {
    SmpDecision d = smp_act(*policy_, *model_, history);
    if (d.fallback) fallbacks_.fetch_add(1, std::memory_order_relaxed);
    return d.action;
  }
  std::string tag() const override { return "smp:L=" + std::to_string(policy_->window_length); }
  long long fallbacks() const noexcept { return fallbacks_.load(); }

 private:
  const SmpPolicy* policy_;
  const Pomdp* model_;
  mutable std::atomic<long long> fallbacks_{0};
};

// ---------------------------------------------------------------------------
// Policy file

inline Json to_json(const SmpPolicy& p, bool include_q = true) {
  Json stages = Json::array();
  for (const auto& st : p.stages) {
    Json entries = Json::array();
    for (std::size_t i = 0; i < st.size(); ++i) {
      Json e = Json::array({st.key_at(i), st.actions[i]});
      if (include_q) {
        e.push_back(std::vector<double>(st.q.begin() + static_cast<std::ptrdiff_t>(i * p.num_actions),
                                        st.q.begin() + static_cast<std::ptrdiff_t>((i + 1) * p.num_actions)));
      }
      entries.push_back(std::move(e));
    }
    stages.push_back({{"stage", st.stage}, {"window_length", st.window_length}, {"entries", std::move(entries)}});
  }
  return {{"window_length", p.window_length},
          {"value_estimate", p.value_estimate},
          {"mode", to_string(p.mode)},
          {"horizon", p.horizon},
          {"num_actions", p.num_actions},
          {"num_observations", p.num_observations},
          {"stages", std::move(stages)}};
}

inline SmpPolicy smp_policy_from_json(const Json& j) {
  try {
    SmpPolicy p;
    p.window_length = j.at("window_length").get<int>();
    p.value_estimate = j.at("value_estimate").get<double>();
    p.mode = parse_smp_mode(j.at("mode").get<std::string>());
    p.horizon = j.at("horizon").get<int>();
    p.num_actions = j.at("num_actions").get<int>();
    p.num_observations = j.at("num_observations").get<int>();
    const int A = p.num_actions;
    for (const auto& sj : j.at("stages")) {
      SmpStageTable st;
      st.stage = sj.at("stage").get<int>();
      st.window_length = sj.at("window_length").get<int>();
      const auto& entries = sj.at("entries");
      for (const auto& e : entries) {
        const auto key = e.at(0).get<WindowKey>();
        if (p.mode == SmpMode::Reachable) {
          st.keys.push_back(key);
        } else if (key != st.actions.size()) {
          throw ParseError("dense policy entries must be listed in key order");
        }
        st.actions.push_back(e.at(1).get<int>());
        if (e.size() > 2) {
          auto q = e.at(2).get<std::vector<double>>();
          if (static_cast<int>(q.size()) != A) throw ShapeError("policy q vector has wrong length");
          st.q.insert(st.q.end(), q.begin(), q.end());
        } else {
          // Q-values were not saved; the action table still executes.
          st.q.insert(st.q.end(), static_cast<std::size_t>(A), 0.0);
        }
      }
      if (!std::is_sorted(st.keys.begin(), st.keys.end())) throw ParseError("policy keys must be sorted");
      p.stages.push_back(std::move(st));
    }
    if (static_cast<int>(p.stages.size()) != p.horizon - 1) throw ShapeError("policy has wrong number of stages");
    return p;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("policy file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Belief error and suboptimality

namespace detail {

struct ErrorState {
  const Pomdp& m;
  const Policy& policy;
  int L;
  double budget;
  double nodes = 0;
  History history;
  std::vector<double> err;
  std::vector<double> probs;
};

inline void belief_error_from(ErrorState& st, int h, const Vec& alpha) {
  const Pomdp& m = st.m;
  if (++st.nodes > st.budget) throw BudgetExceeded("belief_error_profile: history nodes", history_count(m), st.budget);
  double mass = 0.0;
  for (double v : alpha) mass += v;
  Vec b = alpha;
  for (double& v : b) v /= mass;
  double e;
  try {
    e = l1_distance(b, approx_belief(m, window_of(st.history, st.L)).probs);
  } catch (const ImpossibleObservation&) {
    e = 2.0;
  }
  st.err[h - 1] += mass * e;
  if (h == m.horizon) return;
  st.policy.action_distribution(st.history, st.probs);
  const std::vector<double> pa = st.probs;
  const Matrix& em = m.emission(h + 1);
  for (int a = 0; a < m.num_actions; ++a) {
    if (!(pa[a] > 0.0)) continue;
    Vec pf = push_forward(m.transition(h, a), alpha);
    for (double& v : pf) v *= pa[a];
    for (int y = 0; y < m.num_observations; ++y) {
      Vec next(m.num_states);
      double joint = 0.0;
      for (int x = 0; x < m.num_states; ++x) {
        next[x] = pf[x] * em(x, y);
        joint += next[x];
      }
      if (!(joint > kImpossibleThreshold)) continue;
      st.history.actions.push_back(a);
      st.history.observations.push_back(y);
      belief_error_from(st, h + 1, next);
      st.history.actions.pop_back();
      st.history.observations.pop_back();
    }
  }
}

}  // namespace detail

/// E || b_h - b-hat_h ||_1 for h = 1..H under `policy`, where b-hat_h filters
/// the last min(L, h-1) steps. Exact sum over the history tree.
inline std::vector<double> belief_error_profile(const Pomdp& m, const Policy& policy, int L,
                                                double budget = kDefaultHistoryBudget) {
  require_valid(m);
  detail::ErrorState st{m, policy, L, budget, 0, {}, std::vector<double>(m.horizon, 0.0),
                        std::vector<double>(m.num_actions)};
  detail::belief_error_from(st, 1, m.initial_belief);
  return st.err;
}

struct SuboptimalityRow {
  int window_length = 0;
  double v_hat = std::numeric_limits<double>::quiet_NaN();
  double v_pi = std::numeric_limits<double>::quiet_NaN();
  std::string v_pi_method;  // "exact" or "mc"
  double v_pi_half_width = 0.0;
  double v_star = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::quiet_NaN();
  double eps_hat = std::numeric_limits<double>::quiet_NaN();  // max_h belief error under pi* and pi-hat
  double bound = std::numeric_limits<double>::quiet_NaN();    // 2 H^2 eps_hat
  std::string error;
};

struct ReportOptions {
  SmpOptions smp;
  double exact_budget = kDefaultHistoryBudget;
  long long mc_episodes = 100000;
  std::uint64_t seed = 1;
};

/// One row per window length. Rows whose planning exceeds the budget carry
/// the error message and leave numeric columns empty.
inline std::vector<SuboptimalityRow> suboptimality_report(const Pomdp& m, const std::vector<int>& window_lengths,
                                                          const ReportOptions& opt = {}) {
  require_valid(m);
  std::optional<ExactSolution> star;
  try {
    star = solve_exact(m, opt.exact_budget);
  } catch (const BudgetExceeded&) {
  }
  std::vector<SuboptimalityRow> rows;
  for (int L : window_lengths) {
    SuboptimalityRow row;
    row.window_length = L;
    try {
      const SmpPolicy pol = smp_plan(m, L, opt.smp);
      row.v_hat = pol.value_estimate;
      SmpExecutor exec(pol, m);
      try {
        row.v_pi = eval_policy_exact(m, exec, opt.exact_budget);
        row.v_pi_method = "exact";
      } catch (const BudgetExceeded&) {
        auto est = eval_policy_mc(m, exec, opt.mc_episodes, opt.seed, 0.99, opt.smp.threads);
        row.v_pi = est.mean;
        row.v_pi_half_width = est.half_width;
        row.v_pi_method = "mc";
      }
      if (star) {
        row.v_star = star->value();
        row.gap = row.v_star - row.v_pi;
        if (row.v_pi_method == "exact") {
          const auto e_star = belief_error_profile(m, *star, L, opt.exact_budget);
          const auto e_hat = belief_error_profile(m, exec, L, opt.exact_budget);
          double eps = 0.0;
          for (std::size_t k = 0; k < e_star.size(); ++k) eps = std::max({eps, e_star[k], e_hat[k]});
          row.eps_hat = eps;
          row.bound = 2.0 * m.horizon * m.horizon * eps;
        }
      }
    } catch (const BudgetExceeded& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string format_number(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

inline std::string suboptimality_csv(const std::vector<SuboptimalityRow>& rows) {
  std::ostringstream out;
  out << "L,v_hat,v_pi,v_pi_method,v_pi_half_width,v_star,gap,eps_hat,bound,error\n";
  for (const auto& r : rows) {
    out << r.window_length << ',' << format_number(r.v_hat) << ',' << format_number(r.v_pi) << ',' << r.v_pi_method
        << ',' << format_number(r.v_pi_half_width) << ',' << format_number(r.v_star) << ','
        << format_number(r.gap) << ',' << format_number(r.eps_hat) << ',' << format_number(r.bound) << ",\""
        << r.error << "\"\n";
  }
  return out.str();
}

}  // namespace obsplan
