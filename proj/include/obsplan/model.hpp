#pragma once

// Tabular finite-horizon POMDP and its JSON file format.
//
// Steps are 1-based throughout the public API: the agent acts at steps
// 1..H-1 and receives an observation (and its reward) at steps 2..H.
// Storage is dense and 0-based:
//   transitions[i][a]  holds the kernel of step h = i + 1  (i in 0..H-2)
//   emissions[i]       holds the channel of step h = i + 2  (i in 0..H-2)
//   rewards[i]         holds the reward of step  h = i + 2  (i in 0..H-2)

#include <cmath>
#include <cstddef>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "obsplan/errors.hpp"

namespace obsplan {

using Json = nlohmann::json;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }

  double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  std::span<double> row(int r) { return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)}; }
  std::span<const double> row(int r) const {
    return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)};
  }

  const std::vector<double>& data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

struct Pomdp {
  int horizon = 0;
  int num_states = 0;
  int num_actions = 0;
  int num_observations = 0;
  std::vector<double> initial_belief;
  std::vector<std::vector<Matrix>> transitions;  // [H-1][A], S x S, [x][x']
  std::vector<Matrix> emissions;                 // [H-1], S x O, [x][y]
  std::vector<std::vector<double>> rewards;      // [H-1][O]
  Json metadata = Json::object();                // free-form, round-tripped

  /// Kernel T_h(. | x, a) for step h in 1..H-1, indexed [x][x'].
  const Matrix& transition(int h, int a) const { return transitions.at(h - 1).at(a); }
  /// Channel O_h for step h in 2..H, indexed [x][y].
  const Matrix& emission(int h) const { return emissions.at(h - 2); }
  /// Reward R_h over observations for step h in 2..H.
  const std::vector<double>& reward(int h) const { return rewards.at(h - 2); }

  bool operator==(const Pomdp&) const = default;
};

/// Posterior over latent states at a step.
struct Belief {
  int step = 1;
  std::vector<double> probs;
  bool operator==(const Belief&) const = default;
};

/// Full action/observation history (a_1..a_{h-1}, o_2..o_h). observations[k]
/// is the observation received at step k + 2.
struct History {
  std::vector<int> actions;
  std::vector<int> observations;

  int stage() const noexcept { return static_cast<int>(actions.size()) + 1; }
  bool operator==(const History&) const = default;
};

/// Suffix (a_{h-t}..a_{h-1}, o_{h-t+1}..o_h) of a history, anchored at stage h.
struct HistoryWindow {
  int stage = 1;
  std::vector<int> actions;
  std::vector<int> observations;

  int length() const noexcept { return static_cast<int>(actions.size()); }
  bool operator==(const HistoryWindow&) const = default;
};

/// Last `length` steps of `history` as a window at the history's stage.
inline HistoryWindow window_of(const History& history, int length) {
  const int h = history.stage();
  const int t = std::min(length, h - 1);
  HistoryWindow w;
  w.stage = h;
  w.actions.assign(history.actions.end() - t, history.actions.end());
  w.observations.assign(history.observations.end() - t, history.observations.end());
  return w;
}

struct Trajectory {
  std::vector<int> states;        // x_1..x_H
  std::vector<int> actions;       // a_1..a_{H-1}
  std::vector<int> observations;  // o_2..o_H
  std::vector<double> rewards;    // r_2..r_H
  double total_reward = 0.0;
};

inline constexpr double kStochasticTolerance = 1e-9;
/// Rows whose sum is off by more than this (but within tolerance) are
/// renormalized on load; closer rows are left bit-for-bit untouched.
inline constexpr double kRenormalizeThreshold = 1e-12;

namespace detail {

inline std::string step_label(const char* name, std::size_t index, int offset) {
  return std::string(name) + "[" + std::to_string(index) + "] (h=" + std::to_string(index + offset) + ")";
}

inline void check_distribution(std::span<const double> row, const std::string& where,
                               std::vector<Violation>& out) {
  double sum = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    const double p = row[k];
    if (!std::isfinite(p) || p < 0.0) {
      out.push_back({where, "entry " + std::to_string(k) + " is negative or not finite"});
      return;
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kStochasticTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "row sums to " << sum;
    out.push_back({where, msg.str()});
  }
}

}  // namespace detail

/// Every invariant violation of the model, with its location. Empty iff valid.
inline std::vector<Violation> validate(const Pomdp& m) {
  std::vector<Violation> out;
  const int H = m.horizon, S = m.num_states, A = m.num_actions, O = m.num_observations;
  if (H < 2) out.push_back({"horizon", "must be >= 2"});
  if (S < 1) out.push_back({"num_states", "must be >= 1"});
  if (A < 1) out.push_back({"num_actions", "must be >= 1"});
  if (O < 1) out.push_back({"num_observations", "must be >= 1"});
  if (!out.empty()) return out;

  if (static_cast<int>(m.initial_belief.size()) != S) {
    out.push_back({"initial_belief", "expected " + std::to_string(S) + " entries"});
  } else {
    detail::check_distribution(m.initial_belief, "initial_belief", out);
  }

  const auto steps = static_cast<std::size_t>(H - 1);
  if (m.transitions.size() != steps) {
    out.push_back({"transitions", "expected " + std::to_string(steps) + " steps"});
  } else {
    for (std::size_t i = 0; i < steps; ++i) {
      if (static_cast<int>(m.transitions[i].size()) != A) {
        out.push_back({detail::step_label("transitions", i, 1), "expected " + std::to_string(A) + " actions"});
        continue;
      }
      for (int a = 0; a < A; ++a) {
        const Matrix& t = m.transitions[i][a];
        const std::string base = "transitions h=" + std::to_string(i + 1) + " a=" + std::to_string(a);
        if (t.rows() != S || t.cols() != S) {
          out.push_back({base, "expected " + std::to_string(S) + "x" + std::to_string(S)});
          continue;
        }
        for (int x = 0; x < S; ++x) detail::check_distribution(t.row(x), base + " x=" + std::to_string(x), out);
      }
    }
  }

  if (m.emissions.size() != steps) {
    out.push_back({"emissions", "expected " + std::to_string(steps) + " steps"});
  } else {
    for (std::size_t i = 0; i < steps; ++i) {
      const Matrix& e = m.emissions[i];
      const std::string base = "emissions h=" + std::to_string(i + 2);
      if (e.rows() != S || e.cols() != O) {
        out.push_back({base, "expected " + std::to_string(S) + "x" + std::to_string(O)});
        continue;
      }
      for (int x = 0; x < S; ++x) detail::check_distribution(e.row(x), base + " x=" + std::to_string(x), out);
    }
  }

  if (m.rewards.size() != steps) {
    out.push_back({"rewards", "expected " + std::to_string(steps) + " steps"});
  } else {
    for (std::size_t i = 0; i < steps; ++i) {
      const std::string base = "rewards h=" + std::to_string(i + 2);
      if (static_cast<int>(m.rewards[i].size()) != O) {
        out.push_back({base, "expected " + std::to_string(O) + " entries"});
        continue;
      }
      for (int y = 0; y < O; ++y) {
        const double r = m.rewards[i][y];
        if (!(r >= 0.0 && r <= 1.0)) {
          out.push_back({base + " o=" + std::to_string(y), "reward " + std::to_string(r) + " outside [0, 1]"});
        }
      }
    }
  }
  return out;
}

/// Throws ValidationError when the model has any violation.
inline void require_valid(const Pomdp& m) {
  auto v = validate(m);
  if (!v.empty()) throw ValidationError(std::move(v));
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline const Json& member(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing key \"") + key + "\"");
  return *it;
}

inline int read_int(const Json& obj, const char* key) {
  const Json& v = member(obj, key);
  if (!v.is_number_integer()) throw ParseError(std::string("\"") + key + "\" must be an integer");
  return v.get<int>();
}

inline std::vector<double> read_vector(const Json& v, std::size_t expected, const std::string& path) {
  if (!v.is_array()) throw ParseError(path + ": expected an array");
  if (v.size() != expected) {
    throw ShapeError(path + ": expected " + std::to_string(expected) + " entries, got " + std::to_string(v.size()));
  }
  std::vector<double> out(expected);
  for (std::size_t k = 0; k < expected; ++k) {
    if (!v[k].is_number()) throw ParseError(path + "[" + std::to_string(k) + "]: expected a number");
    out[k] = v[k].get<double>();
  }
  return out;
}

inline const Json& read_array(const Json& v, std::size_t expected, const std::string& path) {
  if (!v.is_array()) throw ParseError(path + ": expected an array");
  if (v.size() != expected) {
    throw ShapeError(path + ": expected " + std::to_string(expected) + " entries, got " + std::to_string(v.size()));
  }
  return v;
}

inline Matrix read_matrix(const Json& v, int rows, int cols, const std::string& path) {
  read_array(v, static_cast<std::size_t>(rows), path);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    auto row = read_vector(v[r], static_cast<std::size_t>(cols), path + "[" + std::to_string(r) + "]");
    std::copy(row.begin(), row.end(), m.row(r).begin());
  }
  return m;
}

inline void renormalize(std::span<double> row) {
  double sum = 0.0;
  for (double p : row) sum += p;
  const double err = std::abs(sum - 1.0);
  if (err > kRenormalizeThreshold && err <= kStochasticTolerance && sum > 0.0) {
    for (double& p : row) p /= sum;
  }
}

inline Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (int r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(Json(std::vector<double>(row.begin(), row.end())));
  }
  return rows;
}

}  // namespace detail

inline Json to_json(const Pomdp& m) {
  Json j;
  j["horizon"] = m.horizon;
  j["num_states"] = m.num_states;
  j["num_actions"] = m.num_actions;
  j["num_observations"] = m.num_observations;
  j["initial_belief"] = m.initial_belief;
  Json trans = Json::array();
  for (const auto& per_action : m.transitions) {
    Json step = Json::array();
    for (const auto& t : per_action) step.push_back(detail::matrix_json(t));
    trans.push_back(std::move(step));
  }
  j["transitions"] = std::move(trans);
  Json ems = Json::array();
  for (const auto& e : m.emissions) ems.push_back(detail::matrix_json(e));
  j["emissions"] = std::move(ems);
  j["rewards"] = m.rewards;
  if (!m.metadata.empty()) j["metadata"] = m.metadata;
  return j;
}

/// Parses and validates a model. Rows within tolerance of stochastic are
/// renormalized; anything else that breaks an invariant raises ValidationError.
inline Pomdp pomdp_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("model: expected a JSON object");
  static const char* const kKeys[] = {"horizon",     "num_states",  "num_actions", "num_observations",
                                      "initial_belief", "transitions", "emissions", "rewards", "metadata"};
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : kKeys) known = known || key == k;
    if (!known) {
      throw ParseError("unexpected key \"" + key +
                       "\"; rewards must be given per observation under \"rewards\"");
    }
  }
  Pomdp m;
  m.horizon = detail::read_int(j, "horizon");
  m.num_states = detail::read_int(j, "num_states");
  m.num_actions = detail::read_int(j, "num_actions");
  m.num_observations = detail::read_int(j, "num_observations");
  if (m.horizon < 2 || m.num_states < 1 || m.num_actions < 1 || m.num_observations < 1) {
    throw ValidationError(validate(m));
  }
  const int S = m.num_states, A = m.num_actions, O = m.num_observations;
  const auto steps = static_cast<std::size_t>(m.horizon - 1);

  m.initial_belief = detail::read_vector(detail::member(j, "initial_belief"), S, "initial_belief");

  const Json& tj = detail::read_array(detail::member(j, "transitions"), steps, "transitions");
  m.transitions.resize(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const std::string p = "transitions[" + std::to_string(i) + "]";
    detail::read_array(tj[i], static_cast<std::size_t>(A), p);
    for (int a = 0; a < A; ++a) {
      m.transitions[i].push_back(detail::read_matrix(tj[i][a], S, S, p + "[" + std::to_string(a) + "]"));
    }
  }

  const Json& ej = detail::read_array(detail::member(j, "emissions"), steps, "emissions");
  for (std::size_t i = 0; i < steps; ++i) {
    m.emissions.push_back(detail::read_matrix(ej[i], S, O, "emissions[" + std::to_string(i) + "]"));
  }

  const Json& rj = detail::member(j, "rewards");
  detail::read_array(rj, steps, "rewards");
  for (std::size_t i = 0; i < steps; ++i) {
    const Json& row = rj[i];
    if (!row.is_array()) {
      throw ParseError("rewards[" + std::to_string(i) + "]: expected an array over observations");
    }
    m.rewards.push_back(detail::read_vector(row, O, "rewards[" + std::to_string(i) + "]"));
  }

  if (auto it = j.find("metadata"); it != j.end()) m.metadata = *it;

  detail::renormalize(m.initial_belief);
  for (auto& per_action : m.transitions)
    for (auto& t : per_action)
      for (int x = 0; x < S; ++x) detail::renormalize(t.row(x));
  for (auto& e : m.emissions)
    for (int x = 0; x < S; ++x) detail::renormalize(e.row(x));

  require_valid(m);
  return m;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline void write_json_file(const Json& j, const std::string& path, int indent = -1) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(indent) << '\n';
  if (!out) throw Error("write failed: " + path);
}

inline Pomdp load(const std::string& path) { return pomdp_from_json(read_json_file(path)); }

inline void save(const Pomdp& m, const std::string& path) { write_json_file(to_json(m), path); }

}  // namespace obsplan
