#pragma once

// Observability of emission channels.
//
// gamma(O) = min over nonzero zero-sum v of ||O^T v||_1 / ||v||_1. Fixing the
// sign pattern s of v makes the problem an LP in u = |v| >= 0:
//   minimize sum_y w_y  s.t.  -w <= O^T (s*u) <= w,  sum u = 1,  sum s*u = 0.
// Patterns are taken up to global negation (s_0 = +1), so 2^(S-1) - 1 LPs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "obsplan/errors.hpp"
#include "obsplan/model.hpp"
#include "obsplan/parallel.hpp"
#include "obsplan/rng.hpp"
#include "obsplan/simplex.hpp"

namespace obsplan {

inline constexpr int kMaxExactStates = 14;

struct GammaResult {
  double gamma = 0.0;
  std::vector<double> certificate;  // zero-sum, ||v||_1 = 1
};

/// ||O^T v||_1 / ||v||_1.
inline double contraction_ratio(const Matrix& emission, std::span<const double> v) {
  double num = 0.0, den = 0.0;
  for (int y = 0; y < emission.cols(); ++y) {
    double s = 0.0;
    for (int x = 0; x < emission.rows(); ++x) s += emission(x, y) * v[x];
    num += std::abs(s);
  }
  for (double vi : v) den += std::abs(vi);
  return num / den;
}

namespace detail {

inline std::vector<int> sign_pattern(std::uint64_t p, int S) {
  std::vector<int> s(S, 1);
  for (int i = 1; i < S; ++i)
    if ((p >> (i - 1)) & 1U) s[i] = -1;
  return s;
}

// LP for one sign pattern. Returns nullopt when the pattern is all-positive.
inline std::optional<GammaResult> gamma_for_pattern(const Matrix& em, std::uint64_t pattern) {
  const int S = em.rows(), O = em.cols();
  if (pattern == 0) return std::nullopt;
  const auto s = sign_pattern(pattern, S);
  LpProblem lp;
  lp.num_vars = S + O;
  lp.cost.assign(S + O, 0.0);
  for (int y = 0; y < O; ++y) lp.cost[S + y] = 1.0;
  for (int y = 0; y < O; ++y) {
    LpRow up, down;
    up.coeffs.assign(S + O, 0.0);
    down.coeffs.assign(S + O, 0.0);
    for (int x = 0; x < S; ++x) {
      up.coeffs[x] = em(x, y) * s[x];
      down.coeffs[x] = -em(x, y) * s[x];
    }
    up.coeffs[S + y] = -1.0;
    down.coeffs[S + y] = -1.0;
    lp.rows.push_back(std::move(up));
    lp.rows.push_back(std::move(down));
  }
  LpRow norm{std::vector<double>(S + O, 0.0), Sense::Equal, 1.0};
  LpRow zero{std::vector<double>(S + O, 0.0), Sense::Equal, 0.0};
  for (int x = 0; x < S; ++x) {
    norm.coeffs[x] = 1.0;
    zero.coeffs[x] = s[x];
  }
  lp.rows.push_back(std::move(norm));
  lp.rows.push_back(std::move(zero));

  const LpResult res = lp_solve(lp, static_cast<long long>(S) * O * 1000);
  if (res.status != LpStatus::Optimal) {
    throw Error(std::string("gamma_exact: sign-pattern LP ended with status ") + to_string(res.status));
  }
  GammaResult g;
  g.certificate.resize(S);
  for (int x = 0; x < S; ++x) g.certificate[x] = s[x] * std::max(res.x[x], 0.0);
  g.gamma = contraction_ratio(em, g.certificate);
  return g;
}

}  // namespace detail

/// Exact gamma by enumerating sign patterns. Ties go to the lowest pattern
/// index, so the certificate does not depend on `threads`. For S = 1 there
/// is no admissible direction and gamma is reported as 1.
inline GammaResult gamma_exact(const Matrix& emission, int threads = 1) {
  const int S = emission.rows();
  if (S > kMaxExactStates) {
    throw DimensionTooLarge("gamma_exact: " + std::to_string(S) + " states exceeds the limit of " +
                            std::to_string(kMaxExactStates));
  }
  if (S == 1) return {1.0, {0.0}};
  const std::uint64_t patterns = std::uint64_t{1} << (S - 1);
  std::vector<std::optional<GammaResult>> results(patterns);
  parallel_for(patterns, threads, [&](std::size_t p) { results[p] = detail::gamma_for_pattern(emission, p); });
  std::optional<GammaResult> best;
  for (auto& r : results) {
    if (!r) continue;
    if (!best || r->gamma < best->gamma) best = std::move(r);
  }
  return *best;
}

/// Upper bound on gamma from sampled directions: every pairwise indicator
/// difference, then `num_samples` random directions alternating between
/// sparse signed vectors and differences of two Dirichlet(1) draws.
inline GammaResult gamma_mc_upper(const Matrix& emission, long long num_samples, std::uint64_t seed) {
  if (num_samples < 1) throw InvalidArgument("gamma_mc_upper: num_samples must be >= 1");
  const int S = emission.rows();
  if (S == 1) return {1.0, {0.0}};
  GammaResult best{std::numeric_limits<double>::infinity(), {}};
  auto consider = [&](std::vector<double> v) {
    const double r = contraction_ratio(emission, v);
    if (r < best.gamma) {
      double n = 0.0;
      for (double x : v) n += std::abs(x);
      for (double& x : v) x /= n;
      best = {r, std::move(v)};
    }
  };
  for (int i = 0; i < S; ++i) {
    for (int j = i + 1; j < S; ++j) {
      std::vector<double> v(S, 0.0);
      v[i] = 0.5;
      v[j] = -0.5;
      consider(std::move(v));
    }
  }
  for (long long k = 0; k < num_samples; ++k) {
    Rng rng = stream(seed, static_cast<std::uint64_t>(k));
    std::vector<double> v(S, 0.0);
    if (k % 2 == 0) {
      // Random disjoint positive and negative supports with random weights.
      const int size = 2 + uniform_index(rng, S - 1);
      std::vector<int> idx(S);
      for (int i = 0; i < S; ++i) idx[i] = i;
      for (int i = 0; i < size; ++i) std::swap(idx[i], idx[i + uniform_index(rng, S - i)]);
      const int npos = 1 + uniform_index(rng, size - 1);
      const auto wp = dirichlet(rng, npos);
      const auto wn = dirichlet(rng, size - npos);
      for (int i = 0; i < npos; ++i) v[idx[i]] = wp[i];
      for (int i = npos; i < size; ++i) v[idx[i]] = -wn[i - npos];
    } else {
      const auto p = dirichlet(rng, S);
      const auto q = dirichlet(rng, S);
      for (int i = 0; i < S; ++i) v[i] = p[i] - q[i];
    }
    double n = 0.0;
    for (double x : v) n += std::abs(x);
    if (n > 1e-12) consider(std::move(v));
  }
  return best;
}

struct WeakGamma {
  double gamma = 0.0;
  int first = 0;
  int second = 1;
};

/// Minimum pairwise L1 distance between emission rows.
inline WeakGamma gamma_weak(const Matrix& emission) {
  const int S = emission.rows();
  if (S < 2) throw InvalidArgument("gamma_weak: needs at least 2 states");
  WeakGamma best{std::numeric_limits<double>::infinity(), 0, 1};
  for (int i = 0; i < S; ++i) {
    for (int j = i + 1; j < S; ++j) {
      double d = 0.0;
      for (int y = 0; y < emission.cols(); ++y) d += std::abs(emission(i, y) - emission(j, y));
      if (d < best.gamma) best = {d, i, j};
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Per-model report

enum class GammaMethod { ExactLp, McUpper, ClosedForm };

inline const char* to_string(GammaMethod m) {
  switch (m) {
    case GammaMethod::ExactLp: return "exact-lp";
    case GammaMethod::McUpper: return "mc-upper";
    case GammaMethod::ClosedForm: return "closed-form";
  }
  return "?";
}

struct StepObservability {
  int step = 2;
  double gamma = 0.0;  // an upper bound, not gamma, when method is McUpper
  GammaMethod method = GammaMethod::ExactLp;
  std::vector<double> certificate;
  double weak_gamma = std::numeric_limits<double>::quiet_NaN();
  int weak_first = -1;
  int weak_second = -1;
};

struct ObservabilityReport {
  std::vector<StepObservability> steps;
  double pomdp_gamma = 0.0;
  /// ExactLp/ClosedForm only if every step is; McUpper if any step is.
  GammaMethod method = GammaMethod::ExactLp;
  bool is_upper_bound() const noexcept { return method == GammaMethod::McUpper; }
};

struct ObservabilityOptions {
  bool monte_carlo = false;
  long long samples = 10000;
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Closed-form per-step gammas recorded by a generator, if any.
inline std::optional<std::vector<double>> closed_form_gammas(const Pomdp& m) {
  if (!m.metadata.is_object()) return std::nullopt;
  auto it = m.metadata.find("emission_gamma");
  if (it == m.metadata.end() || !it->is_array() || it->size() != m.emissions.size()) return std::nullopt;
  return it->get<std::vector<double>>();
}

/// gamma per emission step and their minimum. In exact mode, steps with more
/// than kMaxExactStates states use the generator's closed form when the model
/// carries one and raise DimensionTooLarge otherwise. Identical channels are
/// solved once.
inline ObservabilityReport observability_report(const Pomdp& m, const ObservabilityOptions& opt = {}) {
  ObservabilityReport rep;
  const auto closed = closed_form_gammas(m);
  std::vector<std::size_t> solved;  // indices into rep.steps with distinct channels
  for (std::size_t i = 0; i < m.emissions.size(); ++i) {
    const Matrix& em = m.emissions[i];
    StepObservability st;
    st.step = static_cast<int>(i) + 2;
    bool reused = false;
    for (std::size_t k : solved) {
      if (m.emissions[k] == em) {
        st = rep.steps[k];
        st.step = static_cast<int>(i) + 2;
        reused = true;
        break;
      }
    }
    if (!reused) {
      if (opt.monte_carlo) {
        auto g = gamma_mc_upper(em, opt.samples, opt.seed);
        st.gamma = g.gamma;
        st.certificate = std::move(g.certificate);
        st.method = GammaMethod::McUpper;
      } else if (m.num_states <= kMaxExactStates) {
        auto g = gamma_exact(em, opt.threads);
        st.gamma = g.gamma;
        st.certificate = std::move(g.certificate);
        st.method = GammaMethod::ExactLp;
      } else if (closed) {
        st.gamma = (*closed)[i];
        st.method = GammaMethod::ClosedForm;
      } else {
        throw DimensionTooLarge("gamma: " + std::to_string(m.num_states) +
                                " states exceeds the exact limit and the model has no closed-form gamma; use the "
                                "Monte Carlo method");
      }
      if (m.num_states >= 2) {
        const auto w = gamma_weak(em);
        st.weak_gamma = w.gamma;
        st.weak_first = w.first;
        st.weak_second = w.second;
      }
      solved.push_back(i);
    }
    rep.steps.push_back(std::move(st));
  }
  rep.pomdp_gamma = std::numeric_limits<double>::infinity();
  bool any_mc = false, any_closed = false;
  for (const auto& st : rep.steps) {
    rep.pomdp_gamma = std::min(rep.pomdp_gamma, st.gamma);
    any_mc = any_mc || st.method == GammaMethod::McUpper;
    any_closed = any_closed || st.method == GammaMethod::ClosedForm;
  }
  rep.method = any_mc ? GammaMethod::McUpper : any_closed ? GammaMethod::ClosedForm : GammaMethod::ExactLp;
  return rep;
}

}  // namespace obsplan
