#pragma once

// Filter-stability experiments: belief error against window length, decay
// fits, and exact finite-sum checks of the one-step contraction inequalities.

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
#include "obsplan/observability.hpp"
#include "obsplan/parallel.hpp"
#include "obsplan/policy.hpp"
#include "obsplan/rng.hpp"

namespace obsplan {

enum class CurveMethod { MonteCarlo, ExactTree };

inline const char* to_string(CurveMethod m) { return m == CurveMethod::MonteCarlo ? "mc" : "exact-tree"; }

struct CurvePoint {
  int t = 0;
  double mean_l1 = 0.0;
  double stderr_l1 = 0.0;
  long long trials = 0;   // rollouts (mc) or histories (exact-tree) that entered the mean
  long long skipped = 0;  // windows whose approximate belief hit an impossible observation
};

struct ContractionCurve {
  double gamma = std::numeric_limits<double>::quiet_NaN();
  std::string policy;
  CurveMethod method = CurveMethod::MonteCarlo;
  int anchor = 2;
  std::vector<CurvePoint> points;
};

struct CurveOptions {
  CurveMethod method = CurveMethod::MonteCarlo;
  long long trials = 1000;  // mc only
  std::uint64_t seed = 1;
  int threads = 1;
  double budget = kDefaultHistoryBudget;  // exact-tree only
};

namespace detail {

inline constexpr std::size_t kCurveBlock = 256;

struct CurveAccumulator {
  std::vector<double> sum, sumsq, weight;
  std::vector<long long> count, skipped;

  explicit CurveAccumulator(int n) : sum(n, 0.0), sumsq(n, 0.0), weight(n, 0.0), count(n, 0), skipped(n, 0) {}

  void add(const CurveAccumulator& o) {
    for (std::size_t i = 0; i < sum.size(); ++i) {
      sum[i] += o.sum[i];
      sumsq[i] += o.sumsq[i];
      weight[i] += o.weight[i];
      count[i] += o.count[i];
      skipped[i] += o.skipped[i];
    }
  }
};

inline Vec window_prior(const Pomdp& m, int anchor) {
  return anchor == 1 ? m.initial_belief : Vec(m.num_states, 1.0 / m.num_states);
}

inline void mc_block(const Pomdp& m, const Policy& policy, int anchor, int t_max, std::uint64_t seed,
                     std::size_t begin, std::size_t end, CurveAccumulator& acc) {
  std::vector<double> probs(m.num_actions);
  for (std::size_t trial = begin; trial < end; ++trial) {
    Rng rng = stream(seed, trial);
    History hist;
    int x = sample_discrete(rng, m.initial_belief);
    Vec b = m.initial_belief;
    Vec bhat;
    bool ok = true;
    const int last = anchor + t_max;
    for (int h = 1;; ++h) {
      if (h == anchor) bhat = window_prior(m, anchor);
      if (h >= anchor) {
        const int t = h - anchor;
        if (ok) {
          const double e = l1_distance(b, bhat);
          acc.sum[t] += e;
          acc.sumsq[t] += e * e;
          acc.weight[t] += 1.0;
          ++acc.count[t];
        } else {
          ++acc.skipped[t];
        }
      }
      if (h == last) break;
      policy.action_distribution(hist, probs);
      const int a = sample_discrete(rng, probs);
      x = sample_discrete(rng, m.transition(h, a).row(x));
      const int y = sample_discrete(rng, m.emission(h + 1).row(x));
      b = belief_update(m, b, h, a, y);
      if (h >= anchor && ok) {
        try {
          bhat = belief_update(m, bhat, h, a, y);
        } catch (const ImpossibleObservation&) {
          ok = false;
        }
      }
      hist.actions.push_back(a);
      hist.observations.push_back(y);
    }
  }
}

struct TreeNode {
  int stage = 1;
  Vec alpha;  // P(history, x_stage = x)
  History history;
  Vec bhat;
  bool bhat_ok = true;
};

struct TreeWalk {
  const Pomdp& m;
  const Policy& policy;
  int anchor;
  int last;
  double budget;
  std::atomic<long long>& nodes;

  void record(const TreeNode& n, CurveAccumulator& acc) const {
    if (n.stage < anchor) return;
    const int t = n.stage - anchor;
    double mass = 0.0;
    for (double v : n.alpha) mass += v;
    if (!n.bhat_ok) {
      ++acc.skipped[t];
      return;
    }
    double e = 0.0;
    for (int x = 0; x < m.num_states; ++x) e += std::abs(n.alpha[x] / mass - n.bhat[x]);
    acc.sum[t] += mass * e;
    acc.sumsq[t] += mass * e * e;
    acc.weight[t] += mass;
    ++acc.count[t];
  }

  std::vector<TreeNode> children(const TreeNode& n) const {
    std::vector<TreeNode> out;
    if (n.stage >= last) return out;
    if (static_cast<double>(nodes.fetch_add(1) + 1) > budget) {
      throw BudgetExceeded("contraction_curve (exact-tree): history nodes", history_count(m), budget);
    }
    std::vector<double> probs(m.num_actions);
    policy.action_distribution(n.history, probs);
    const int h = n.stage;
    const Matrix& em = m.emission(h + 1);
    for (int a = 0; a < m.num_actions; ++a) {
      if (!(probs[a] > 0.0)) continue;
      Vec pf = push_forward(m.transition(h, a), n.alpha);
      for (double& v : pf) v *= probs[a];
      for (int y = 0; y < m.num_observations; ++y) {
        TreeNode c;
        c.stage = h + 1;
        c.alpha.resize(m.num_states);
        double joint = 0.0;
        for (int x = 0; x < m.num_states; ++x) {
          c.alpha[x] = pf[x] * em(x, y);
          joint += c.alpha[x];
        }
        if (!(joint > kImpossibleThreshold)) continue;
        c.history = n.history;
        c.history.actions.push_back(a);
        c.history.observations.push_back(y);
        if (c.stage == anchor) {
          c.bhat = window_prior(m, anchor);
        } else if (c.stage > anchor && n.bhat_ok) {
          try {
            c.bhat = belief_update(m, n.bhat, h, a, y);
          } catch (const ImpossibleObservation&) {
            c.bhat_ok = false;
          }
        } else if (c.stage > anchor) {
          c.bhat_ok = false;
        }
        out.push_back(std::move(c));
      }
    }
    return out;
  }

  void dfs(const TreeNode& n, CurveAccumulator& acc) const {
    record(n, acc);
    for (const auto& c : children(n)) dfs(c, acc);
  }
};

}  // namespace detail

/// E || b_{anchor+t} - b-hat_{anchor+t} ||_1 for t = 0..t_max, where b-hat is
/// filtered from the window prior placed at the anchor step (uniform, or b_1
/// when anchor = 1). Results do not depend on opt.threads.
inline ContractionCurve contraction_curve(const Pomdp& m, const Policy& policy, int anchor, int t_max,
                                          const CurveOptions& opt = {}) {
  require_valid(m);
  if (anchor < 1 || t_max < 0 || anchor + t_max > m.horizon) {
    throw InvalidArgument("contraction_curve: need 1 <= anchor and anchor + t_max <= H");
  }
  const int n = t_max + 1;
  detail::CurveAccumulator total(n);
  if (opt.method == CurveMethod::MonteCarlo) {
    if (opt.trials < 1) throw InvalidArgument("contraction_curve: trials must be >= 1");
    const auto trials = static_cast<std::size_t>(opt.trials);
    const std::size_t blocks = (trials + detail::kCurveBlock - 1) / detail::kCurveBlock;
    std::vector<detail::CurveAccumulator> parts(blocks, detail::CurveAccumulator(n));
    parallel_for(blocks, opt.threads, [&](std::size_t k) {
      const std::size_t begin = k * detail::kCurveBlock;
      detail::mc_block(m, policy, anchor, t_max, opt.seed, begin, std::min(trials, begin + detail::kCurveBlock),
                       parts[k]);
    });
    for (const auto& p : parts) total.add(p);
  } else {
    std::atomic<long long> nodes{0};
    detail::TreeWalk walk{m, policy, anchor, anchor + t_max, opt.budget, nodes};
    detail::TreeNode root;
    root.alpha = m.initial_belief;
    if (anchor == 1) root.bhat = m.initial_belief;
    // Expand breadth-first to a fixed frontier, then walk subtrees in
    // parallel. The frontier depends only on the model, not on threads.
    std::vector<detail::TreeNode> frontier{root};
    while (frontier.size() < 64 && frontier.front().stage < anchor + t_max) {
      std::vector<detail::TreeNode> next;
      for (const auto& node : frontier) {
        walk.record(node, total);
        for (auto& c : walk.children(node)) next.push_back(std::move(c));
      }
      if (next.empty()) {
        frontier.clear();
        break;
      }
      frontier = std::move(next);
    }
    std::vector<detail::CurveAccumulator> parts(frontier.size(), detail::CurveAccumulator(n));
    parallel_for(frontier.size(), opt.threads, [&](std::size_t k) { walk.dfs(frontier[k], parts[k]); });
    for (const auto& p : parts) total.add(p);
  }

  ContractionCurve curve;
  curve.policy = policy.tag();
  curve.method = opt.method;
  curve.anchor = anchor;
  if (auto g = closed_form_gammas(m)) curve.gamma = *std::min_element(g->begin(), g->end());
  for (int t = 0; t < n; ++t) {
    CurvePoint p;
    p.t = t;
    p.trials = total.count[t];
    p.skipped = total.skipped[t];
    if (total.weight[t] > 0.0) {
      p.mean_l1 = total.sum[t] / total.weight[t];
      if (opt.method == CurveMethod::MonteCarlo && total.count[t] > 1) {
        const double c = static_cast<double>(total.count[t]);
        const double var = std::max(0.0, (total.sumsq[t] - c * p.mean_l1 * p.mean_l1) / (c - 1.0));
        p.stderr_l1 = std::sqrt(var / c);
      }
    }
    curve.points.push_back(p);
  }
  return curve;
}

inline std::string curve_csv(const ContractionCurve& c) {
  std::ostringstream out;
  out.precision(17);
  out << "t,mean_l1,stderr,trials\n";
  for (const auto& p : c.points) out << p.t << ',' << p.mean_l1 << ',' << p.stderr_l1 << ',' << p.trials << '\n';
  return out.str();
}

struct DecayFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  int points_used = 0;
};

/// OLS of log(mean_l1) on t over t in [t_lo, t_hi], using only points whose
/// mean exceeds 5 standard errors (and is positive).
inline DecayFit fit_decay_slope(const ContractionCurve& c, int t_lo, int t_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& p : c.points) {
    if (p.t < t_lo || p.t > t_hi) continue;
    if (!(p.mean_l1 > 5.0 * p.stderr_l1) || !(p.mean_l1 > 0.0)) continue;
    const double x = p.t, y = std::log(p.mean_l1);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  DecayFit f;
  f.points_used = n;
  if (n < 2) return f;
  const double den = n * sxx - sx * sx;
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

// ---------------------------------------------------------------------------
// One-step inequality checks

/// Bayes update used by the inequality suite. Shifted is a deliberately wrong
/// update (observation column y+1) that the suite must catch.
enum class UpdateVariant { Correct, ShiftedColumn };

struct InequalityCheck {
  std::string name;
  long long evaluated = 0;
  long long violations = 0;
  double worst_slack = std::numeric_limits<double>::infinity();  // min over trials of rhs - lhs
};

struct Reproducer {
  std::uint64_t seed = 0;
  long long trial = 0;
  std::string inequality;
  double lhs = 0.0;
  double rhs = 0.0;
  Json inputs;
};

struct InequalityReport {
  std::uint64_t seed = 0;
  long long trials = 0;
  UpdateVariant variant = UpdateVariant::Correct;
  std::vector<InequalityCheck> checks;
  std::vector<Reproducer> failures;

  long long total_violations() const {
    long long n = 0;
    for (const auto& c : checks) n += c.violations;
    return n;
  }
  bool passed() const { return total_violations() == 0; }
};

inline constexpr double kInequalitySlack = 1e-9;

inline const std::vector<std::string>& inequality_names() {
  static const std::vector<std::string> names = {
      "kl-weak-contraction",        // E KL(B b || B b') <= KL(b || b')
      "kl-sqrt-contraction",        // E sqrt KL(B b || B b') <= (1 - g^2 / (2^14 max(1, KL))) sqrt KL(b || b')
      "kl-sqrt-contraction-update", // same with U = B after a transition
      "linf-ratio-supermartingale", // E ||U b / U b'||_inf <= ||b / b'||_inf
      "renyi-to-l1",                // ||P - Q||_1 <= 4 sqrt(exp(D2(P || Q) / 4) - 1)
      "renyi-contraction",          // E sqrt(exp(D2(B b || B b') / 4) - 1) <= (1 - g^4 / 2^40) sqrt(exp(D2 / 4) - 1)
      "renyi-contraction-update",   // same with U
      "f-kl-sandwich",              // (x-1)^2 / 4 <= x - log x - 1 <= (x-1)^2 on [0.5, 1.5]
  };
  return names;
}

namespace detail {

inline Vec suite_bayes(const Matrix& em, std::span<const double> b, int y, UpdateVariant v) {
  const int col = v == UpdateVariant::Correct ? y : (y + 1) % em.cols();
  return channel_bayes(em, b, col);
}

inline double renyi_potential(std::span<const double> p, std::span<const double> q) {
  return std::sqrt(std::expm1(renyi2(p, q) / 4.0));
}

struct TrialInputs {
  int S = 0, O = 0;
  Matrix channel;
  Matrix kernel;
  Vec b, bp;
  double gamma = 0.0;
  double x = 1.0;  // point for the f_KL sandwich
};

inline TrialInputs sample_trial(std::uint64_t seed, long long trial) {
  Rng rng = stream(seed, static_cast<std::uint64_t>(trial));
  TrialInputs in;
  in.S = 2 + uniform_index(rng, 5);  // 2..6
  in.O = 2 + uniform_index(rng, 7);  // 2..8
  const int S = in.S, O = in.O;
  in.channel = Matrix(S, O);
  const int kind = uniform_index(rng, 3);
  if (kind == 0 && O >= S) {
    // Identity-mix channel padded with extra observation columns.
    const double g0 = 0.05 + 0.95 * uniform01(rng);
    const auto noise = dirichlet(rng, O);
    for (int x = 0; x < S; ++x)
      for (int y = 0; y < O; ++y) in.channel(x, y) = (1.0 - g0) * noise[y] + (x == y ? g0 : 0.0);
  } else {
    const double alpha = kind == 1 ? 0.3 : 1.0;
    for (int x = 0; x < S; ++x) {
      const auto row = dirichlet(rng, O, alpha);
      std::copy(row.begin(), row.end(), in.channel.row(x).begin());
    }
  }
  in.kernel = Matrix(S, S);
  for (int x = 0; x < S; ++x) {
    const auto row = dirichlet(rng, S);
    std::copy(row.begin(), row.end(), in.kernel.row(x).begin());
  }
  in.bp = dirichlet(rng, S);
  const int bkind = uniform_index(rng, 4);
  if (bkind == 0) {
    in.b = in.bp;
  } else if (bkind == 1) {
    // Close to b', so KL is small.
    const auto d = dirichlet(rng, S);
    const double w = 0.05 * uniform01(rng);
    in.b.resize(S);
    for (int x = 0; x < S; ++x) in.b[x] = (1.0 - w) * in.bp[x] + w * d[x];
  } else {
    in.b = dirichlet(rng, S, bkind == 2 ? 1.0 : 0.2);
    if (bkind == 3) {
      // Sparse b: zero out a random subset but keep at least one entry.
      const int keep = uniform_index(rng, S);
      double s = 0.0;
      for (int x = 0; x < S; ++x) {
        if (x != keep && uniform01(rng) < 0.5) in.b[x] = 0.0;
        s += in.b[x];
      }
      for (double& v : in.b) v /= s;
    }
  }
  in.x = 0.5 + uniform01(rng);
  in.gamma = gamma_exact(in.channel).gamma;
  return in;
}

inline Json matrix_rows(const Matrix& m) {
  Json j = Json::array();
  for (int r = 0; r < m.rows(); ++r) j.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  return j;
}

struct TrialOutcome {
  std::vector<double> lhs, rhs;
  std::vector<char> evaluated;
};

inline TrialOutcome evaluate_trial(const TrialInputs& in, UpdateVariant variant) {
  const std::size_t k = inequality_names().size();
  TrialOutcome out{std::vector<double>(k, 0.0), std::vector<double>(k, 0.0), std::vector<char>(k, 1)};
  const Matrix& em = in.channel;
  const double g = in.gamma;
  const double kl0 = kl(in.b, in.bp);
  const double renyi0 = renyi_potential(in.b, in.bp);

  // Bayes operator, y ~ O^T b.
  {
    const Vec qy = channel_obs_dist(em, in.b);
    double e_kl = 0.0, e_sqrt = 0.0, e_renyi = 0.0;
    for (int y = 0; y < in.O; ++y) {
      if (!(qy[y] > kImpossibleThreshold)) continue;
      Vec p, q;
      try {
        p = suite_bayes(em, in.b, y, variant);
        q = suite_bayes(em, in.bp, y, variant);
      } catch (const ImpossibleObservation&) {
        continue;
      }
      const double d = kl(p, q);
      e_kl += qy[y] * d;
      e_sqrt += qy[y] * std::sqrt(d);
      e_renyi += qy[y] * renyi_potential(p, q);
    }
    out.lhs[0] = e_kl;
    out.rhs[0] = kl0;
    out.lhs[1] = e_sqrt;
    out.rhs[1] = (1.0 - g * g / (16384.0 * std::max(1.0, kl0))) * std::sqrt(kl0);
    out.lhs[5] = e_renyi;
    out.rhs[5] = (1.0 - std::pow(g, 4) / std::ldexp(1.0, 40)) * renyi0;
  }
  // Belief update U = B(T b; y), y ~ O^T T b.
  {
    const Vec tb = push_forward(in.kernel, in.b);
    const Vec tbp = push_forward(in.kernel, in.bp);
    const Vec qy = channel_obs_dist(em, tb);
    double e_sqrt = 0.0, e_inf = 0.0, e_renyi = 0.0;
    for (int y = 0; y < in.O; ++y) {
      if (!(qy[y] > kImpossibleThreshold)) continue;
      Vec p, q;
      try {
        p = suite_bayes(em, tb, y, variant);
        q = suite_bayes(em, tbp, y, variant);
      } catch (const ImpossibleObservation&) {
        continue;
      }
      e_sqrt += qy[y] * std::sqrt(kl(p, q));
      e_inf += qy[y] * linf_ratio(p, q);
      e_renyi += qy[y] * renyi_potential(p, q);
    }
    out.lhs[2] = e_sqrt;
    out.rhs[2] = (1.0 - g * g / (16384.0 * std::max(1.0, kl0))) * std::sqrt(kl0);
    out.lhs[3] = e_inf;
    out.rhs[3] = linf_ratio(in.b, in.bp);
    out.lhs[6] = e_renyi;
    out.rhs[6] = (1.0 - std::pow(g, 4) / std::ldexp(1.0, 40)) * renyi0;
  }
  out.lhs[4] = l1_distance(in.b, in.bp);
  out.rhs[4] = 4.0 * renyi0;
  // The sandwich is two inequalities; report the tighter margin.
  const double fx = f_kl(in.x), d2 = (in.x - 1.0) * (in.x - 1.0);
  if (d2 / 4.0 - fx > fx - d2) {
    out.lhs[7] = d2 / 4.0;
    out.rhs[7] = fx;
  } else {
    out.lhs[7] = fx;
    out.rhs[7] = d2;
  }
  return out;
}

}  // namespace detail

/// Samples `num_trials` random (channel, kernel, b, b') instances with b << b'
/// and evaluates every inequality as an exact finite sum. A violation beyond
/// kInequalitySlack is recorded with the full inputs.
inline InequalityReport contraction_inequality_suite(std::uint64_t seed, long long num_trials, int threads = 1,
                                                     UpdateVariant variant = UpdateVariant::Correct) {
  if (num_trials < 0) throw InvalidArgument("contraction_inequality_suite: num_trials must be >= 0");
  const auto& names = inequality_names();
  std::vector<detail::TrialInputs> inputs(static_cast<std::size_t>(num_trials));
  std::vector<detail::TrialOutcome> outcomes(inputs.size());
  parallel_for(inputs.size(), threads, [&](std::size_t i) {
    inputs[i] = detail::sample_trial(seed, static_cast<long long>(i));
    outcomes[i] = detail::evaluate_trial(inputs[i], variant);
  });

  InequalityReport rep;
  rep.seed = seed;
  rep.trials = num_trials;
  rep.variant = variant;
  for (const auto& n : names) rep.checks.push_back({n, 0, 0, std::numeric_limits<double>::infinity()});

  // Grid check of the f_KL sandwich, independent of the random trials.
  for (int k = 0; k <= 1000; ++k) {
    const double x = 0.5 + k / 1000.0;
    const double fx = f_kl(x), d2 = (x - 1.0) * (x - 1.0);
    auto& c = rep.checks[7];
    ++c.evaluated;
    const double slack = std::min(fx - d2 / 4.0, d2 - fx);
    c.worst_slack = std::min(c.worst_slack, slack);
    if (slack < -kInequalitySlack) {
      ++c.violations;
      rep.failures.push_back({seed, -1, names[7], std::max(d2 / 4.0, fx), std::min(fx, d2), Json{{"x", x}}});
    }
  }

  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto& out = outcomes[i];
    for (std::size_t k = 0; k < names.size(); ++k) {
      if (!out.evaluated[k]) continue;
      auto& c = rep.checks[k];
      ++c.evaluated;
      const double slack = out.rhs[k] - out.lhs[k];
      c.worst_slack = std::min(c.worst_slack, slack);
      if (!(slack >= -kInequalitySlack)) {
        ++c.violations;
        const auto& in = inputs[i];
        rep.failures.push_back({seed, static_cast<long long>(i), names[k], out.lhs[k], out.rhs[k],
                                Json{{"num_states", in.S},
                                     {"num_observations", in.O},
                                     {"channel", detail::matrix_rows(in.channel)},
                                     {"kernel", detail::matrix_rows(in.kernel)},
                                     {"b", in.b},
                                     {"b_prime", in.bp},
                                     {"gamma", in.gamma},
                                     {"x", in.x}}});
      }
    }
  }
  return rep;
}

inline Json to_json(const InequalityReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"evaluated", c.evaluated},
                      {"violations", c.violations},
                      {"worst_slack", c.worst_slack}});
  }
  Json failures = Json::array();
  for (const auto& f : r.failures) {
    failures.push_back({{"seed", f.seed},
                        {"trial", f.trial},
                        {"inequality", f.inequality},
                        {"lhs", f.lhs},
                        {"rhs", f.rhs},
                        {"inputs", f.inputs}});
  }
  return {{"seed", r.seed},
          {"trials", r.trials},
          {"update", r.variant == UpdateVariant::Correct ? "correct" : "shifted-column"},
          {"passed", r.passed()},
          {"checks", std::move(checks)},
          {"failures", std::move(failures)}};
}

// ---------------------------------------------------------------------------
// Demonstrations that one Bayes step need not shrink KL

struct IncreaseCase {
  double eps = 0.0;
  double kl_before = 0.0;
  double kl_after = 0.0;  // after observing the unlikely symbol
  double prob_observation = 0.0;
};

struct DecrementCase {
  double eps = 0.0;
  double kl_before = 0.0;
  double expected_kl_after = 0.0;
  double decrement = 0.0;
  double ratio = 0.0;  // decrement / kl_before^2
};

struct DivergenceDemoReport {
  IncreaseCase increase;
  double gamma = 0.0;
  std::vector<DecrementCase> decrements;
  bool increase_confirmed = false;  // kl_after > kl_before
  double ratio_spread = 0.0;        // max ratio / min ratio across eps
};

/// Two-state symmetric channel with crossover eps: rows (1-eps, eps), (eps, 1-eps).
inline Matrix symmetric_channel(double eps) {
  Matrix m(2, 2);
  m(0, 0) = m(1, 1) = 1.0 - eps;
  m(0, 1) = m(1, 0) = eps;
  return m;
}

/// b = (1 - eps^2, eps^2), b' = uniform: observing the second symbol makes
/// KL jump from at most log 2 to order log(1/eps). Then, for the channel with
/// rows (1/2 + gamma, 1/2 - gamma), b = (1, 0) and b' = (1 - eps, eps), the
/// one-step expected KL decrement shrinks like KL^2.
inline DivergenceDemoReport divergence_increase_demo(double eps_increase = 0.01, double gamma = 0.25,
                                                     const std::vector<double>& eps_grid = {0.1, 0.05, 0.01}) {
  auto check_eps = [](double e) {
    if (!(e > 0.0 && e < 0.5)) {
      throw InvalidArgument("divergence demo needs 0 < eps < 1/2 (eps = 0 makes the construction degenerate)");
    }
  };
  check_eps(eps_increase);
  for (double e : eps_grid) check_eps(e);
  if (!(gamma > 0.0 && gamma < 0.5)) throw InvalidArgument("divergence demo needs 0 < gamma < 1/2");

  DivergenceDemoReport rep;
  {
    const double e = eps_increase;
    const Matrix ch = symmetric_channel(e);
    const Vec b{1.0 - e * e, e * e}, bp{0.5, 0.5};
    rep.increase.eps = e;
    rep.increase.kl_before = kl(b, bp);
    rep.increase.kl_after = kl(channel_bayes(ch, b, 1), channel_bayes(ch, bp, 1));
    rep.increase.prob_observation = channel_obs_dist(ch, b)[1];
    rep.increase_confirmed = rep.increase.kl_after > rep.increase.kl_before;
  }
  rep.gamma = gamma;
  const Matrix ch = symmetric_channel(0.5 - gamma);
  double lo = kInf, hi = 0.0;
  for (double e : eps_grid) {
    const Vec b{1.0, 0.0}, bp{1.0 - e, e};
    DecrementCase c;
    c.eps = e;
    c.kl_before = kl(b, bp);
    const Vec qy = channel_obs_dist(ch, b);
    for (int y = 0; y < 2; ++y) c.expected_kl_after += qy[y] * kl(channel_bayes(ch, b, y), channel_bayes(ch, bp, y));
    c.decrement = c.kl_before - c.expected_kl_after;
    c.ratio = c.decrement / (c.kl_before * c.kl_before);
    lo = std::min(lo, c.ratio);
    hi = std::max(hi, c.ratio);
    rep.decrements.push_back(c);
  }
  rep.ratio_spread = lo > 0.0 ? hi / lo : kInf;
  return rep;
}

inline Json to_json(const DivergenceDemoReport& r) {
  Json dec = Json::array();
  for (const auto& c : r.decrements) {
    dec.push_back({{"eps", c.eps},
                   {"kl_before", c.kl_before},
                   {"expected_kl_after", c.expected_kl_after},
                   {"decrement", c.decrement},
                   {"decrement_over_kl_squared", c.ratio}});
  }
  return {{"increase",
           {{"eps", r.increase.eps},
            {"kl_before", r.increase.kl_before},
            {"kl_after_unlikely_observation", r.increase.kl_after},
            {"probability_of_that_observation", r.increase.prob_observation},
            {"confirmed", r.increase_confirmed}}},
          {"quadratic_decrement", {{"gamma", r.gamma}, {"cases", std::move(dec)}, {"ratio_spread", r.ratio_spread}}}};
}

}  // namespace obsplan
