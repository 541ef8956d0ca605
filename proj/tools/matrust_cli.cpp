// matrust: train, predict and evaluate trust-inference models from the shell.
//
// Exit codes: 0 ok, 2 I/O error, 3 invalid input or parameters, 4 solver failure.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>

#include "matrust/bench.hpp"
#include "matrust/eval.hpp"
#include "matrust/ingest.hpp"
#include "matrust/predict.hpp"
#include "matrust/solver.hpp"

namespace {

using namespace matrust;

constexpr int kExitIo = 2;
constexpr int kExitValidation = 3;
constexpr int kExitSolver = 4;

struct CommonOptions {
  HyperParams hp;
  bool no_bias = false;
  bool clamp = false;
  std::string init = "jitter";
  std::string levels;
};

void add_hyperparams(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--lambda", o.hp.lambda, "Regularization strength")->capture_default_str();
  cmd->add_option("--r", o.hp.r, "Number of latent factors")->capture_default_str();
  cmd->add_option("--m1", o.hp.m1, "Max outer iterations")->capture_default_str();
  cmd->add_option("--m2", o.hp.m2, "Max inner (factorization) iterations")->capture_default_str();
  cmd->add_option("--xi1", o.hp.xi1, "Outer convergence threshold")->capture_default_str();
  cmd->add_option("--xi2", o.hp.xi2, "Inner convergence threshold")->capture_default_str();
  cmd->add_flag("--no-bias", o.no_bias, "Train latent factors only (no bias terms)");
  cmd->add_flag("--freeze-coefficients", o.hp.freeze_coefficients,
                "Keep bias coefficients fixed at 1 (KBV mode)");
  cmd->add_option("--seed", o.hp.rng_seed, "Random seed")->capture_default_str();
  cmd->add_option("--init", o.init, "Factor initialization: jitter (1/r plus noise) or random")
      ->check(CLI::IsMember({"jitter", "random"}))
      ->capture_default_str();
  cmd->add_option("--threads", o.hp.threads, "Worker threads for the row solver")
      ->capture_default_str();
}

void add_levels(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--levels", o.levels,
                  "Trust level map, e.g. observer=0.1,apprentice=0.4,journeyer=0.7,master=0.9");
}

HyperParams finalize(CommonOptions& o) {
  o.hp.use_bias = !o.no_bias;
  o.hp.init = o.init == "random" ? InitMode::kRandom : InitMode::kUniformJitter;
  o.hp.validate();
  return o.hp;
}

SparseTrustMatrix read_edges(const std::string& path, const std::string& levels) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge list: " + path);
  const LevelMap map = levels.empty() ? LevelMap::advogato() : LevelMap::parse(levels);
  auto t = parse_edge_list(in, map);
  std::clog << "loaded " << t.num_observations() << " observations over " << t.num_users()
            << " users from " << path << '\n';
  return t;
}

void write_trace(const TrainTrace& trace, std::ostream& out) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "kind\touter\tobjective\talpha1\talpha2\talpha3\tdelta\tinner_iterations\tpseudo_inverse\n";
  for (const auto& s : trace.steps) {
    const char* kind = "initial";
    switch (s.kind) {
      case TraceStep::Kind::kInitial: kind = "initial"; break;
      case TraceStep::Kind::kTrustorUpdate: kind = "trustor"; break;
      case TraceStep::Kind::kTrusteeUpdate: kind = "trustee"; break;
      case TraceStep::Kind::kCoefficientUpdate: kind = "coefficients"; break;
    }
    out << kind << '\t' << s.outer << '\t' << s.objective << "\t\t\t\t\t\t\n";
  }
  for (std::size_t k = 0; k < trace.outer.size(); ++k) {
    const auto& o = trace.outer[k];
    out << "outer\t" << k + 1 << '\t' << o.objective << '\t' << o.alpha[0] << '\t' << o.alpha[1]
        << '\t' << o.alpha[2] << '\t' << o.delta << '\t' << o.inner_iterations << '\t'
        << o.used_pseudo_inverse << '\n';
  }
}

// "r=2..20", "r=2,5,10", "lambda=0.1..2.0:0.1".
std::pair<SweepParam, std::vector<double>> parse_sweep(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw ValidationError("sweep must look like r=2..20 or lambda=0.1,0.5");
  const auto name = spec.substr(0, eq);
  SweepParam param;
  if (name == "r") {
    param = SweepParam::kRank;
  } else if (name == "lambda") {
    param = SweepParam::kLambda;
  } else {
    throw ValidationError("unknown sweep parameter '" + name + "'");
  }
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw ValidationError("bad sweep value '" + s + "'");
    return v;
  };
  std::vector<double> values;
  const auto body = spec.substr(eq + 1);
  if (auto dots = body.find(".."); dots != std::string::npos) {
    const auto colon = body.find(':', dots);
    const double lo = number(body.substr(0, dots));
    const double hi = number(body.substr(dots + 2, colon == std::string::npos ? std::string::npos
                                                                               : colon - dots - 2));
    const double step = colon == std::string::npos ? 1.0 : number(body.substr(colon + 1));
    if (!(step > 0) || hi < lo) throw ValidationError("bad sweep range '" + body + "'");
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long k = 0; k <= count; ++k) values.push_back(lo + static_cast<double>(k) * step);
  } else {
    std::stringstream ss(body);
    for (std::string item; std::getline(ss, item, ',');) values.push_back(number(item));
  }
  if (values.empty()) throw ValidationError("empty sweep");
  return {param, values};
}

void print_table(const std::vector<EvalReport>& reports, std::ostream& out) {
  out << "label\trmse\tmae\talpha1\talpha2\talpha3\touter_iterations\n";
  out << std::fixed << std::setprecision(6);
  for (const auto& r : reports) {
    out << r.label << '\t' << r.rmse << '\t' << r.mae << '\t' << r.alpha[0] << '\t' << r.alpha[1]
        << '\t' << r.alpha[2] << '\t' << r.outer_iterations << '\n';
  }
  out.unsetf(std::ios::floatfield);
}

void write_json_lines(const std::string& path, const std::vector<EvalReport>& reports) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open report file for writing: " + path);
  for (const auto& r : reports) out << report_to_json(r).dump() << '\n';
}

int cmd_train(const std::string& input, const std::string& output, std::string trace_path,
              bool substeps, CommonOptions& o) {
  const auto hp = [&] {
    auto h = finalize(o);
    h.trace_substeps = substeps;
    return h;
  }();
  const auto t = read_edges(input, o.levels);
  const auto start = std::chrono::steady_clock::now();
  const auto result = train(t, hp);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::clog << "trained in " << secs << " s, " << result.trace.outer.size() << " outer iterations"
            << (result.trace.converged ? " (converged)" : "") << '\n';

  save_model_file(result.model, output);
  if (trace_path.empty()) trace_path = output + ".trace.tsv";
  std::ofstream trace(trace_path);
  if (!trace) throw IoError("cannot open trace file for writing: " + trace_path);
  write_trace(result.trace, trace);
  std::clog << "wrote " << output << " and " << trace_path << '\n';
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& pairs_path,
                const std::string& output, bool clamp, bool objective) {
  const auto model = load_model_file(model_path);
  std::ofstream file;
  if (output != "-") {
    file.open(output);
    if (!file) throw IoError("cannot open output file: " + output);
  }
  std::ostream& out = output == "-" ? std::cout : file;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  auto name = [&](std::size_t u) { return model.labels.empty() ? std::to_string(u) : model.labels[u]; };

  if (objective) {
    auto scores = objective_scores(model);
    for (Eigen::Index v = 0; v < scores.size(); ++v) {
      const double s = clamp ? std::clamp(scores[v], 0.0, 1.0) : scores[v];
      out << name(static_cast<std::size_t>(v)) << '\t' << s << '\n';
    }
    return 0;
  }

  std::unordered_map<std::string, UserIndex> index;
  for (std::size_t u = 0; u < model.n(); ++u) index.emplace(name(u), static_cast<UserIndex>(u));

  std::ifstream pairs_file;
  if (pairs_path != "-") {
    pairs_file.open(pairs_path);
    if (!pairs_file) throw IoError("cannot open pair file: " + pairs_path);
  }
  std::istream& in = pairs_path == "-" ? std::cin : pairs_file;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
      line.pop_back();
    }
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected u<TAB>v: " + line);
    }
    const auto u_name = line.substr(0, tab);
    const auto v_name = line.substr(tab + 1);
    const auto u = index.find(u_name);
    const auto v = index.find(v_name);
    if (u == index.end() || v == index.end()) {
      throw ValidationError("line " + std::to_string(line_no) + ": unknown user '" +
                            (u == index.end() ? u_name : v_name) + "'");
    }
    if (u->second == v->second) {
      throw ValidationError("line " + std::to_string(line_no) + ": self-pair: " + line);
    }
    out << u_name << '\t' << v_name << '\t'
        << predict_pair(model, u->second, v->second, {clamp}) << '\n';
  }
  return 0;
}

int cmd_evaluate(const std::string& input, std::size_t holdout, int seeds,
                 const std::vector<std::string>& ablation, const std::string& sweep_spec,
                 const std::string& json_path, CommonOptions& o) {
  const auto hp = finalize(o);
  const auto t = read_edges(input, o.levels);
  EvalConfig config;
  config.holdout = holdout;
  config.seed = hp.rng_seed;
  config.predict.clamp = o.clamp;
  if (holdout > t.num_observations()) {
    throw ValidationError("holdout " + std::to_string(holdout) + " exceeds the " +
                          std::to_string(t.num_observations()) + " observed pairs");
  }

  std::vector<EvalReport> reports;
  if (!ablation.empty()) {
    std::vector<AblationMode> modes;
    for (const auto& m : ablation) modes.push_back(parse_ablation_mode(m));
    reports = run_ablation(t, hp, modes, config);
    print_table(reports, std::cout);
  } else if (!sweep_spec.empty()) {
    const auto [param, values] = parse_sweep(sweep_spec);
    reports = sweep(t, hp, param, values, config);
    print_table(reports, std::cout);
  } else if (seeds > 1) {
    auto summary = evaluate_seeds(t, hp, config, seeds);
    print_table(summary.runs, std::cout);
    std::cout << "rmse_mean=" << summary.rmse_mean << "\nrmse_min=" << summary.rmse_min
              << "\nrmse_max=" << summary.rmse_max << "\nmae_mean=" << summary.mae_mean
              << "\nmae_min=" << summary.mae_min << "\nmae_max=" << summary.mae_max << '\n';
    reports = std::move(summary.runs);
  } else {
    reports.push_back(evaluate(t, hp, config));
    write_report_text(reports.back(), std::cout);
  }
  if (!json_path.empty()) write_json_lines(json_path, reports);
  return 0;
}

int cmd_bench(const std::vector<std::string>& sizes_spec, int repeats, const std::string& json_path,
              const std::string& latency_model, std::size_t trials, CommonOptions& o) {
  if (!latency_model.empty()) {
    const auto model = load_model_file(latency_model);
    const auto stats = query_latency(model, trials);
    std::cout << "n=" << model.n() << "\nr=" << model.r() << "\ntrials=" << stats.trials
              << "\npairs_per_trial=" << stats.pairs_per_trial << "\ncold_ns=" << stats.cold_ns
              << "\nmedian_ns=" << stats.median_ns << "\nmean_ns=" << stats.mean_ns
              << "\np90_ns=" << stats.p90_ns << '\n';
    return 0;
  }
  const auto hp = finalize(o);
  std::vector<ScalePoint> sizes;
  for (const auto& s : sizes_spec) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw ValidationError("size must be n:observations, got " + s);
    try {
      sizes.push_back({std::stoul(s.substr(0, colon)), std::stoul(s.substr(colon + 1))});
    } catch (const std::exception&) {
      throw ValidationError("bad size '" + s + "'");
    }
  }
  SyntheticSpec base;
  base.trustor_bias_sd = 0.1;
  base.trustee_bias_sd = 0.1;
  base.factor_sd = 0.15;
  base.noise_sd = 0.05;
  base.seed = hp.rng_seed;
  const auto rows = scale_run(base, sizes, hp, repeats);
  std::cout << "n\tobservations\tseconds\tmemory_estimate_bytes\touter_iterations\n";
  for (const auto& r : rows) {
    std::cout << r.n << '\t' << r.num_observations << '\t' << r.seconds << '\t'
              << r.memory_estimate_bytes << '\t' << r.outer_iterations << '\n';
  }
  if (!json_path.empty()) {
    std::ofstream out(json_path);
    if (!out) throw IoError("cannot open report file for writing: " + json_path);
    write_scale_table(rows, out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"matrust: multi-aspect trust inference by matrix factorization with bias"};
  app.set_config("--config", "", "Read options from a TOML/INI file");
  app.require_subcommand(1);

  CommonOptions train_opts;
  std::string train_input, train_output, trace_path;
  bool substeps = false;
  auto* train_cmd = app.add_subcommand("train", "Fit a model to an edge list");
  train_cmd->add_option("--input", train_input, "TSV edge list")->required();
  train_cmd->add_option("--output", train_output, "Model file to write")->required();
  train_cmd->add_option("--trace", trace_path, "Training trace TSV (default <output>.trace.tsv)");
  train_cmd->add_flag("--trace-substeps", substeps, "Record the objective after every sub-step");
  add_hyperparams(train_cmd, train_opts);
  add_levels(train_cmd, train_opts);

  std::string model_path, pairs_path = "-", predict_output = "-";
  bool predict_clamp = false, objective = false;
  auto* predict_cmd = app.add_subcommand("predict", "Score trustor/trustee pairs with a model");
  predict_cmd->add_option("--model", model_path, "Model file")->required();
  predict_cmd->add_option("--pairs", pairs_path, "TSV of u<TAB>v pairs ('-' for stdin)")
      ->capture_default_str();
  predict_cmd->add_option("--output", predict_output, "Output TSV ('-' for stdout)")
      ->capture_default_str();
  predict_cmd->add_flag("--clamp", predict_clamp, "Clip scores to [0,1]");
  predict_cmd->add_flag("--objective", objective, "List one objective score per trustee");

  CommonOptions eval_opts;
  std::string eval_input, sweep_spec, json_path;
  std::size_t holdout = 500;
  int seeds = 1;
  std::vector<std::string> ablation;
  auto* eval_cmd = app.add_subcommand("evaluate", "Holdout evaluation, ablations and sweeps");
  eval_cmd->add_option("--input", eval_input, "TSV edge list")->required();
  eval_cmd->add_option("--holdout", holdout, "Number of hidden pairs")->capture_default_str();
  eval_cmd->add_option("--seeds", seeds, "Repeat over this many consecutive seeds")
      ->capture_default_str();
  eval_cmd->add_option("--ablation", ablation, "Modes: full,no_bias,frozen_coefficients")
      ->delimiter(',');
  eval_cmd->add_option("--sweep", sweep_spec, "Parameter sweep, e.g. r=2..20 or lambda=0.1..2:0.1");
  eval_cmd->add_option("--json", json_path, "Write one JSON record per report to this file");
  eval_cmd->add_flag("--clamp", eval_opts.clamp, "Clip predictions to [0,1]");
  add_hyperparams(eval_cmd, eval_opts);
  add_levels(eval_cmd, eval_opts);

  CommonOptions bench_opts;
  bench_opts.hp.m1 = 2;
  bench_opts.hp.m2 = 5;
  bench_opts.hp.xi1 = 0.0;
  bench_opts.hp.xi2 = 0.0;
  std::vector<std::string> sizes{"5000:50000", "10000:100000", "20000:200000"};
  int repeats = 3;
  std::string bench_json, latency_model;
  std::size_t trials = 200;
  auto* bench_cmd = app.add_subcommand("bench", "Training scalability and query latency");
  bench_cmd->add_option("--sizes", sizes, "Synthetic sizes as n:observations")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--repeats", repeats, "Timed runs per size (best is kept)")
      ->capture_default_str();
  bench_cmd->add_option("--json", bench_json, "Write one JSON record per size");
  bench_cmd->add_option("--latency-model", latency_model, "Measure query latency of this model");
  bench_cmd->add_option("--trials", trials, "Latency trials")->capture_default_str();
  add_hyperparams(bench_cmd, bench_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*train_cmd) return cmd_train(train_input, train_output, trace_path, substeps, train_opts);
    if (*predict_cmd) {
      return cmd_predict(model_path, pairs_path, predict_output, predict_clamp, objective);
    }
    if (*eval_cmd) {
      return cmd_evaluate(eval_input, holdout, seeds, ablation, sweep_spec, json_path, eval_opts);
    }
    if (*bench_cmd) {
      return cmd_bench(sizes, repeats, bench_json, latency_model, trials, bench_opts);
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const SolverError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolver;
  }
  return 0;
}
