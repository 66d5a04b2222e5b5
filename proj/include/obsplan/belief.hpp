#pragma once

// Bayes filter primitives and divergences between distributions.
// All sums run in ascending index order so results are bit-reproducible.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "obsplan/errors.hpp"
#include "obsplan/model.hpp"

namespace obsplan {

/// Denominators at or below this make an observation impossible.
inline constexpr double kImpossibleThreshold = 1e-300;

using Vec = std::vector<double>;

// ---------------------------------------------------------------------------
// Channel-level operations (no model needed)

/// Observation distribution O^T b for a channel indexed [x][y].
inline Vec channel_obs_dist(const Matrix& emission, std::span<const double> b) {
  Vec q(emission.cols(), 0.0);
  for (int x = 0; x < emission.rows(); ++x) {
    const double bx = b[x];
    if (bx == 0.0) continue;
    auto row = emission.row(x);
    for (int y = 0; y < emission.cols(); ++y) q[y] += bx * row[y];
  }
  return q;
}

/// Push-forward T b for a kernel indexed [x][x'].
inline Vec push_forward(const Matrix& kernel, std::span<const double> b) {
  Vec out(kernel.cols(), 0.0);
  for (int x = 0; x < kernel.rows(); ++x) {
    const double bx = b[x];
    if (bx == 0.0) continue;
    auto row = kernel.row(x);
    for (int z = 0; z < kernel.cols(); ++z) out[z] += bx * row[z];
  }
  return out;
}

/// Posterior of b after observing y through the channel. `step` only labels
/// the error.
inline Vec channel_bayes(const Matrix& emission, std::span<const double> b, int y, int step = 0) {
  const int S = emission.rows();
  Vec post(S);
  double z = 0.0;
  for (int x = 0; x < S; ++x) {
    post[x] = emission(x, y) * b[x];
    z += post[x];
  }
  if (!(z > kImpossibleThreshold)) throw ImpossibleObservation(step, y);
  for (double& p : post) p /= z;
  return post;
}

// ---------------------------------------------------------------------------
// Model-level operations. Steps are 1-based as in model.hpp.

inline void check_step(const Pomdp& m, int h, int lo, int hi, const char* what) {
  if (h < lo || h > hi) {
    throw InvalidArgument(std::string(what) + ": step " + std::to_string(h) + " outside [" + std::to_string(lo) +
                          ", " + std::to_string(hi) + "]");
  }
  (void)m;
}

/// O_h(. | b) for h in 2..H.
inline Vec obs_dist(const Pomdp& m, std::span<const double> b, int h) {
  check_step(m, h, 2, m.horizon, "obs_dist");
  return channel_obs_dist(m.emission(h), b);
}

inline Vec obs_dist(const Pomdp& m, const Belief& b) { return obs_dist(m, b.probs, b.step); }

/// B_h(b; y) for h in 2..H.
inline Vec bayes_update(const Pomdp& m, std::span<const double> b, int h, int y) {
  check_step(m, h, 2, m.horizon, "bayes_update");
  return channel_bayes(m.emission(h), b, y, h);
}

inline Belief bayes_update(const Pomdp& m, const Belief& b, int y) {
  return {b.step, bayes_update(m, b.probs, b.step, y)};
}

/// Distribution of y_{h+1} after taking action a from belief b at step h.
inline Vec next_obs_dist(const Pomdp& m, std::span<const double> b, int h, int a) {
  check_step(m, h, 1, m.horizon - 1, "next_obs_dist");
  return channel_obs_dist(m.emission(h + 1), push_forward(m.transition(h, a), b));
}

/// U_h(b; a, y) = B_{h+1}(T_h(a) b; y) for h in 1..H-1.
inline Vec belief_update(const Pomdp& m, std::span<const double> b, int h, int a, int y) {
  check_step(m, h, 1, m.horizon - 1, "belief_update");
  return channel_bayes(m.emission(h + 1), push_forward(m.transition(h, a), b), y, h + 1);
}

inline Belief belief_update(const Pomdp& m, const Belief& b, int a, int y) {
  return {b.step + 1, belief_update(m, b.probs, b.step, a, y)};
}

inline void check_history(const Pomdp& m, std::span<const int> actions, std::span<const int> observations,
                          int last_stage) {
  if (actions.size() != observations.size()) throw InvalidArgument("history: action/observation length mismatch");
  if (last_stage < 1 || last_stage > m.horizon) throw InvalidArgument("history: stage outside horizon");
  for (int a : actions)
    if (a < 0 || a >= m.num_actions) throw InvalidArgument("history: action " + std::to_string(a) + " out of range");
  for (int y : observations)
    if (y < 0 || y >= m.num_observations) {
      throw InvalidArgument("history: observation " + std::to_string(y) + " out of range");
    }
}

/// b_h for a full history, by folding U from b_1.
inline Belief exact_belief(const Pomdp& m, const History& history) {
  check_history(m, history.actions, history.observations, history.stage());
  Vec b = m.initial_belief;
  for (std::size_t k = 0; k < history.actions.size(); ++k) {
    b = belief_update(m, b, static_cast<int>(k) + 1, history.actions[k], history.observations[k]);
  }
  return {history.stage(), std::move(b)};
}

/// b-hat_h for a window: fold U over the window from Unif(S) placed at step
/// h - t, or from b_1 when the window reaches back to step 1.
inline Belief approx_belief(const Pomdp& m, const HistoryWindow& window) {
  const int t = window.length();
  if (window.stage - t < 1) throw InvalidArgument("window longer than stage - 1");
  check_history(m, window.actions, window.observations, window.stage);
  const int start = window.stage - t;
  Vec b = start == 1 ? m.initial_belief : Vec(m.num_states, 1.0 / m.num_states);
  for (int k = 0; k < t; ++k) b = belief_update(m, b, start + k, window.actions[k], window.observations[k]);
  return {window.stage, std::move(b)};
}

inline double l1_distance(std::span<const double> p, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return s;
}

// ---------------------------------------------------------------------------
// Divergences

enum class DivergenceKind { TV, KL, CHI2, RENYI2, HELLINGER2, LINF_RATIO };

struct Divergence {
  DivergenceKind kind;
  double value;
};

inline const char* to_string(DivergenceKind k) {
  switch (k) {
    case DivergenceKind::TV: return "TV";
    case DivergenceKind::KL: return "KL";
    case DivergenceKind::CHI2: return "CHI2";
    case DivergenceKind::RENYI2: return "RENYI2";
    case DivergenceKind::HELLINGER2: return "HELLINGER2";
    case DivergenceKind::LINF_RATIO: return "LINF_RATIO";
  }
  return "?";
}

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double tv(std::span<const double> p, std::span<const double> q) { return 0.5 * l1_distance(p, q); }

// KL and chi2 are summed as nonnegative terms, p log(p/q) - p + q and
// (p - q)^2 / q. Near p = q the plain sums are dominated by rounding, which
// the square roots taken downstream would blow up to ~1e-8.
inline double kl(std::span<const double> p, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) {
      s += std::max(q[i], 0.0);
      continue;
    }
    if (q[i] <= 0.0) return kInf;
    const double d = p[i] - q[i];
    s += p[i] * std::log1p(d / q[i]) - d;
  }
  return std::max(s, 0.0);
}

inline double chi2(std::span<const double> p, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (q[i] <= 0.0) {
      if (p[i] > 0.0) return kInf;
      continue;
    }
    const double d = p[i] - q[i];
    s += d * d / q[i];
  }
  return s;
}

inline double renyi2(std::span<const double> p, std::span<const double> q) {
  const double c = chi2(p, q);
  return std::isinf(c) ? kInf : std::log1p(c);
}

inline double hellinger2(std::span<const double> p, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::sqrt(p[i] * q[i]);
  return std::clamp(1.0 - s, 0.0, 1.0);
}

inline double linf_ratio(std::span<const double> p, std::span<const double> q) {
  double r = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0 && q[i] <= 0.0) continue;
    if (q[i] <= 0.0) return kInf;
    r = std::max(r, p[i] / q[i]);
  }
  return r;
}

inline Divergence divergence(DivergenceKind kind, std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw InvalidArgument("divergence: length mismatch");
  switch (kind) {
    case DivergenceKind::TV: return {kind, tv(p, q)};
    case DivergenceKind::KL: return {kind, kl(p, q)};
    case DivergenceKind::CHI2: return {kind, chi2(p, q)};
    case DivergenceKind::RENYI2: return {kind, renyi2(p, q)};
    case DivergenceKind::HELLINGER2: return {kind, hellinger2(p, q)};
    case DivergenceKind::LINF_RATIO: return {kind, linf_ratio(p, q)};
  }
  throw InvalidArgument("divergence: unknown kind");
}

/// f_KL(x) = x - log x - 1.
inline double f_kl(double x) { return x - std::log(x) - 1.0; }

}  // namespace obsplan
