#pragma once

// obsplan command-line front end. `run` is separate from main so tests can
// drive it with captured streams.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "obsplan/obsplan.hpp"

namespace obsplan::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitModule = 2;
inline constexpr int kExitInternal = 3;

#ifdef OBSPLAN_VERSION
inline constexpr const char* kVersion = OBSPLAN_VERSION;
#else
inline constexpr const char* kVersion = "unknown";
#endif

inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

/// Left-aligned text table.
inline std::string text_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      out << r[c];
      if (c + 1 < r.size()) out << std::string(width[c] - r[c].size() + 2, ' ');
    }
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out.str();
}

inline std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) out << (c ? "," : "") << r[c];
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out.str();
}

inline std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_number(v);
}

struct Settings {
  std::string model;
  std::string policy;
  std::string cnf;
  std::string out;
  std::string format = "text";
  std::string mode = "dense";
  std::string method;
  double budget = 0.0;  // 0 = module default
  int window = 1;
  std::string windows = "1,2,3";
  int threads = default_threads();
  std::uint64_t seed = 1;
  long long trials = 0;
  long long episodes = 100000;
  long long samples = 10000;
  double confidence = 0.99;
  double gamma = 0.25;
  double eps = 0.1;
  int m = 4;
  int n = 0;
  int states = 4, actions = 2, horizon = 0;
  int block_size = 0, steps_per_trial = 0;
  int anchor = 2, t_max = 10;
  bool corrupt = false;
  bool demo = false;
  bool no_q = false;
  std::string kind;  // gen kind
};

class Runner {
 public:
  Runner(std::vector<std::string> argv, std::ostream& out, std::ostream& err)
      : argv_(std::move(argv)), out_(out), err_(err) {}

  int run() {
    CLI::App app{"obsplan: planning in observable POMDPs", "obsplan"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1, 1);
    Settings& s = s_;

    auto common = [&](CLI::App* sub) {
      sub->add_option("--threads", s.threads, "worker threads (default: available parallelism)")
          ->check(CLI::PositiveNumber);
      sub->add_option("--out", s.out, "output file (default: stdout)");
    };
    auto model_opt = [&](CLI::App* sub) {
      sub->add_option("--model", s.model, "model JSON file")->required()->check(CLI::ExistingFile);
    };

    auto* plan = app.add_subcommand("plan", "short-memory planning; writes a policy file");
    model_opt(plan);
    common(plan);
    plan->add_option("--window", s.window, "window length L")->check(CLI::NonNegativeNumber);
    plan->add_option("--mode", s.mode, "dense or reachable")->check(CLI::IsMember({"dense", "reachable"}));
    plan->add_option("--budget", s.budget, "table entry budget");
    plan->add_flag("--no-q", s.no_q, "omit Q tables from the policy file");

    auto* exact = app.add_subcommand("exact", "exact Bellman recursion over beliefs");
    model_opt(exact);
    common(exact);
    exact->add_option("--budget", s.budget, "belief node budget");

    auto* eval = app.add_subcommand("eval", "value of a policy file");
    model_opt(eval);
    common(eval);
    eval->add_option("--policy", s.policy, "policy JSON file from `plan`")->required()->check(CLI::ExistingFile);
    eval->add_option("--method", s.method, "exact or mc (default exact)")->check(CLI::IsMember({"exact", "mc"}));
    eval->add_option("--budget", s.budget, "node budget for exact evaluation");
    eval->add_option("--episodes", s.episodes, "Monte Carlo episodes")->check(CLI::PositiveNumber);
    eval->add_option("--seed", s.seed, "Monte Carlo seed");
    eval->add_option("--confidence", s.confidence, "Hoeffding confidence")->check(CLI::Range(0.0, 1.0));

    auto* gamma = app.add_subcommand("gamma", "observability of each emission step");
    model_opt(gamma);
    common(gamma);
    gamma->add_option("--method", s.method, "exact or mc (default exact)")->check(CLI::IsMember({"exact", "mc"}));
    gamma->add_option("--samples", s.samples, "random directions for mc")->check(CLI::PositiveNumber);
    gamma->add_option("--seed", s.seed, "seed for mc");
    gamma->add_option("--format", s.format, "text or csv")->check(CLI::IsMember({"text", "csv"}));

    auto* contract = app.add_subcommand("contract", "belief contraction curve as CSV");
    model_opt(contract);
    common(contract);
    contract->add_option("--policy", s.policy, "uniform, hashed, or a policy file (default uniform)");
    contract->add_option("--method", s.method, "mc or exact-tree (default mc)")
        ->check(CLI::IsMember({"mc", "exact-tree"}));
    contract->add_option("--anchor", s.anchor, "step where the uniform window prior is placed")
        ->check(CLI::PositiveNumber);
    contract->add_option("--t-max", s.t_max, "largest window length")->check(CLI::NonNegativeNumber);
    contract->add_option("--trials", s.trials, "Monte Carlo trials (default 1000)");
    contract->add_option("--seed", s.seed, "seed for trials and the hashed policy");
    contract->add_option("--budget", s.budget, "node budget for exact-tree");

    auto* check = app.add_subcommand("check", "randomized check of the contraction inequalities");
    common(check);
    check->add_option("--trials", s.trials, "random trials (default 500)");
    check->add_option("--seed", s.seed, "seed");
    check->add_flag("--corrupt", s.corrupt, "use the shifted-column Bayes update (negative control)");
    check->add_flag("--demo", s.demo, "run the divergence-increase demonstration instead");
    check->add_option("--eps", s.eps, "demo: eps of the increase case")->default_str("0.01");
    check->add_option("--gamma", s.gamma, "demo: channel bias of the decrement cases");

    auto* gen = app.add_subcommand("gen", "generate a model file");
    gen->add_option("kind", s.kind, "sat | hadamard | contraction-lb | random | example:<name>")->required();
    gen->add_option("--out", s.out, "output model file")->required();
    gen->add_option("--cnf", s.cnf, "DIMACS CNF input (sat, hadamard)")->check(CLI::ExistingFile);
    gen->add_option("--gamma", s.gamma, "observability parameter");
    gen->add_option("--trials", s.trials, "sat: trial count T (default from the formula)");
    gen->add_option("--n", s.n, "sat: pad the variable count to n");
    gen->add_option("--block-size", s.block_size, "sat: variables assigned per step");
    gen->add_option("--steps", s.steps_per_trial, "sat: steps per trial");
    gen->add_option("--seed", s.seed, "random: seed");
    gen->add_option("--eps", s.eps, "example: eps");
    gen->add_option("--m", s.m, "example: size parameter");
    gen->add_option("--states", s.states, "random: states");
    gen->add_option("--actions", s.actions, "random: actions");
    gen->add_option("--horizon", s.horizon, "contraction-lb, random: horizon");

    auto* compare = app.add_subcommand("compare", "suboptimality of short-memory policies as a table");
    model_opt(compare);
    common(compare);
    compare->add_option("--windows", s.windows, "comma-separated window lengths");
    compare->add_option("--mode", s.mode, "dense or reachable")->check(CLI::IsMember({"dense", "reachable"}));
    compare->add_option("--budget", s.budget, "table and node budget");
    compare->add_option("--episodes", s.episodes, "Monte Carlo episodes when exact evaluation is too large");
    compare->add_option("--seed", s.seed, "Monte Carlo seed");
    compare->add_option("--format", s.format, "text or csv")->check(CLI::IsMember({"text", "csv"}));

    std::vector<const char*> cargv;
    for (const auto& a : argv_) cargv.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::CallForHelp&) {
      out_ << app.help();
      return kExitOk;
    } catch (const CLI::CallForVersion&) {
      out_ << kVersion << '\n';
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      report_error("UsageError", e.what());
      return kExitUsage;
    }

    try {
      CLI::App* sub = app.get_subcommands().front();
      subcommand_ = sub->get_name();
      for (const auto* opt : sub->get_options()) {
        if (opt->count() == 0 || opt->get_name() == "--help") continue;
        flags_[opt->get_name()] = opt->results();
      }
      if (subcommand_ == "plan") return cmd_plan();
      if (subcommand_ == "exact") return cmd_exact();
      if (subcommand_ == "eval") return cmd_eval();
      if (subcommand_ == "gamma") return cmd_gamma();
      if (subcommand_ == "contract") return cmd_contract();
      if (subcommand_ == "check") return cmd_check();
      if (subcommand_ == "gen") return cmd_gen();
      if (subcommand_ == "compare") return cmd_compare();
      return kExitUsage;
    } catch (const InvalidArgument& e) {
      report_error("UsageError", e.what());
      return kExitUsage;
    } catch (const ValidationError& e) {
      Json v = Json::array();
      for (const auto& x : e.violations()) v.push_back({{"location", x.location}, {"message", x.message}});
      report_error(e.kind(), e.what(), {{"violations", v}});
      return kExitModule;
    } catch (const BudgetExceeded& e) {
      report_error(e.kind(), e.what(), {{"required", e.required()}, {"budget", e.budget()}});
      return kExitModule;
    } catch (const SizeBudgetExceeded& e) {
      report_error(e.kind(), e.what(), {{"states", e.states()}, {"actions", e.actions()}, {"horizon", e.horizon()}});
      return kExitModule;
    } catch (const Error& e) {
      report_error(e.kind(), e.what());
      return kExitModule;
    } catch (const std::exception& e) {
      report_error("InternalError", e.what());
      return kExitInternal;
    }
  }

 private:
  void report_error(const std::string& kind, const std::string& message, Json extra = Json::object()) {
    Json j = {{"error", kind}, {"message", message}};
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    err_ << j.dump() << '\n';
  }

  /// Writes the primary output to --out (plus a manifest) or to stdout.
  void emit(const std::string& content) {
    if (s_.out.empty()) {
      out_ << content;
      return;
    }
    std::ofstream f(s_.out, std::ios::binary);
    if (!f) throw ParseError("cannot write " + s_.out);
    f << content;
    f.close();
    write_manifest();
  }

  void write_manifest() {
    Json inputs = Json::object();
    for (const std::string* p : {&s_.model, &s_.policy, &s_.cnf}) {
      if (p->empty()) continue;
      if (p == &s_.policy && (s_.policy == "uniform" || s_.policy == "hashed")) continue;
      inputs[*p] = {{"fnv1a64", hex64(fnv1a(read_file(*p)))}};
    }
    Json manifest = {{"tool", "obsplan"},
                     {"version", kVersion},
                     {"argv", argv_},
                     {"subcommand", subcommand_},
                     {"flags", flags_},
                     {"seed", s_.seed},
                     {"threads", s_.threads},
                     {"inputs", inputs},
                     {"output", s_.out}};
    write_json_file(manifest, s_.out + ".manifest.json", 2);
  }

  double budget_or(double fallback) const { return s_.budget > 0.0 ? s_.budget : fallback; }

  int cmd_plan() {
    const Pomdp m = load(s_.model);
    SmpOptions opt;
    opt.mode = parse_smp_mode(s_.mode);
    opt.budget = budget_or(kDefaultTableBudget);
    opt.threads = s_.threads;
    const SmpPolicy p = smp_plan(m, s_.window, opt);
    if (s_.out.empty()) {
      out_ << format_number(p.value_estimate) << '\n';
    } else {
      emit(to_json(p, !s_.no_q).dump() + "\n");
      out_ << format_number(p.value_estimate) << '\n';
    }
    return kExitOk;
  }

  int cmd_exact() {
    const Pomdp m = load(s_.model);
    const ExactSolution sol = solve_exact(m, budget_or(kDefaultHistoryBudget));
    if (s_.out.empty()) {
      out_ << format_number(sol.value()) << '\n';
    } else {
      emit(sol.to_json().dump() + "\n");
      out_ << format_number(sol.value()) << '\n';
    }
    return kExitOk;
  }

  int cmd_eval() {
    const Pomdp m = load(s_.model);
    const SmpPolicy p = smp_policy_from_json(read_json_file(s_.policy));
    SmpExecutor exec(p, m);
    Json result;
    if (s_.method.empty() || s_.method == "exact") {
      const double v = eval_policy_exact(m, exec, budget_or(kDefaultHistoryBudget));
      result = {{"method", "exact"}, {"value", v}};
    } else {
      const ValueEstimate e = eval_policy_mc(m, exec, s_.episodes, s_.seed, s_.confidence, s_.threads);
      result = {{"method", "mc"},
                {"value", e.mean},
                {"half_width", e.half_width},
                {"episodes", e.samples},
                {"confidence", e.confidence}};
    }
    result["policy"] = exec.tag();
    result["fallbacks"] = exec.fallbacks();
    emit(result.dump() + "\n");
    return kExitOk;
  }

  int cmd_gamma() {
    const Pomdp m = load(s_.model);
    ObservabilityOptions opt;
    opt.monte_carlo = s_.method == "mc";
    opt.samples = s_.samples;
    opt.seed = s_.seed;
    opt.threads = s_.threads;
    const ObservabilityReport rep = observability_report(m, opt);
    std::vector<std::vector<std::string>> rows;
    for (const auto& st : rep.steps) {
      rows.push_back({std::to_string(st.step), num(st.gamma), to_string(st.method), num(st.weak_gamma)});
    }
    rows.push_back({"min", num(rep.pomdp_gamma), to_string(rep.method), ""});
    const std::vector<std::string> header{"step", "gamma", "method", "weak_gamma"};
    emit(s_.format == "csv" ? csv_table(header, rows) : text_table(header, rows));
    return kExitOk;
  }

  int cmd_contract() {
    const Pomdp m = load(s_.model);
    std::unique_ptr<Policy> policy;
    std::optional<SmpPolicy> smp;
    if (s_.policy.empty() || s_.policy == "uniform") {
      policy = std::make_unique<UniformRandomPolicy>();
    } else if (s_.policy == "hashed") {
      policy = std::make_unique<HashedPolicy>(m.num_actions, s_.seed);
    } else {
      smp = smp_policy_from_json(read_json_file(s_.policy));
      policy = std::make_unique<SmpExecutor>(*smp, m);
    }
    CurveOptions opt;
    opt.method = s_.method == "exact-tree" ? CurveMethod::ExactTree : CurveMethod::MonteCarlo;
    opt.trials = s_.trials > 0 ? s_.trials : 1000;
    opt.seed = s_.seed;
    opt.threads = s_.threads;
    opt.budget = budget_or(kDefaultHistoryBudget);
    const ContractionCurve c = contraction_curve(m, *policy, s_.anchor, s_.t_max, opt);
    emit(curve_csv(c));
    return kExitOk;
  }

  int cmd_check() {
    if (s_.demo) {
      const double eps = flags_.contains("--eps") ? s_.eps : 0.01;
      const DivergenceDemoReport r = divergence_increase_demo(eps, s_.gamma);
      emit(to_json(r).dump(2) + "\n");
      return kExitOk;
    }
    const long long trials = s_.trials > 0 ? s_.trials : 500;
    const InequalityReport r = contraction_inequality_suite(
        s_.seed, trials, s_.threads, s_.corrupt ? UpdateVariant::ShiftedColumn : UpdateVariant::Correct);
    emit(to_json(r).dump(2) + "\n");
    // The negative control is expected to find violations.
    return kExitOk;
  }

  int cmd_gen() {
    Pomdp m;
    const std::string& kind = s_.kind;
    auto need_cnf = [&]() {
      if (s_.cnf.empty()) throw InvalidArgument("gen " + kind + ": --cnf is required");
      return load_dimacs(s_.cnf);
    };
    if (kind == "sat") {
      SatHardParams p;
      p.gamma = s_.gamma;
      if (s_.trials > 0) p.trials = s_.trials;
      if (s_.n > 0) p.num_vars = s_.n;
      if (s_.block_size > 0) p.block_size = s_.block_size;
      if (s_.steps_per_trial > 0) p.steps_per_trial = s_.steps_per_trial;
      m = gen_sat_hard(need_cnf(), p);
    } else if (kind == "hadamard") {
      m = gen_hadamard_sat(need_cnf());
    } else if (kind == "contraction-lb") {
      m = gen_contraction_lb(s_.gamma, s_.horizon > 0 ? s_.horizon : 100);
    } else if (kind == "random") {
      const double g = flags_.contains("--gamma") ? s_.gamma : 0.5;
      m = gen_random_observable(s_.states, s_.actions, s_.horizon > 0 ? s_.horizon : 5, g, s_.seed);
    } else if (kind.rfind("example:", 0) == 0) {
      ExampleParams p;
      p.m = s_.m;
      p.eps = s_.eps;
      if (flags_.contains("--gamma")) {
        p.gamma = s_.gamma;
        p.null_gamma = s_.gamma;
      }
      m = gen_example(kind.substr(8), p);
    } else {
      throw InvalidArgument("gen: unknown kind '" + kind + "'");
    }
    require_valid(m);
    emit(to_json(m).dump() + "\n");
    return kExitOk;
  }

  int cmd_compare() {
    const Pomdp m = load(s_.model);
    std::vector<int> Ls;
    std::stringstream ss(s_.windows);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        std::size_t used = 0;
        const int L = std::stoi(tok, &used);
        if (used != tok.size() || L < 0) throw std::invalid_argument(tok);
        Ls.push_back(L);
      } catch (const std::logic_error&) {
        throw InvalidArgument("--windows: bad window length '" + tok + "'");
      }
    }
    ReportOptions opt;
    opt.smp.mode = parse_smp_mode(s_.mode);
    opt.smp.threads = s_.threads;
    if (s_.budget > 0.0) {
      opt.smp.budget = s_.budget;
      opt.exact_budget = s_.budget;
    }
    opt.mc_episodes = s_.episodes;
    opt.seed = s_.seed;
    const auto rows = suboptimality_report(m, Ls, opt);
    if (s_.format == "csv") {
      emit(suboptimality_csv(rows));
      return kExitOk;
    }
    std::vector<std::vector<std::string>> cells;
    for (const auto& r : rows) {
      cells.push_back({std::to_string(r.window_length), num(r.v_hat), num(r.v_pi), r.v_pi_method,
                       num(r.v_pi_half_width), num(r.v_star), num(r.gap), num(r.eps_hat), num(r.bound), r.error});
    }
    emit(text_table({"L", "v_hat", "v_pi", "method", "half_width", "v_star", "gap", "eps_hat", "bound", "error"},
                    cells));
    return kExitOk;
  }

  std::vector<std::string> argv_;
  std::ostream& out_;
  std::ostream& err_;
  Settings s_;
  std::string subcommand_;
  std::map<std::string, std::vector<std::string>> flags_;
};

inline int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  return Runner(argv, out, err).run();
}

inline int run(int argc, char** argv) {
  return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace obsplan::cli
