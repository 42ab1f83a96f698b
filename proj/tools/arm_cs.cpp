// arm-cs: residual tables, single-instance estimates and the simulation
// experiments. Every flag can also be given in a TOML/INI file via --config.

#include <omp.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "armcs/arm.hpp"
#include "armcs/baselines.hpp"
#include "armcs/experiments.hpp"
#include "armcs/residual_table.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace armcs;

namespace {

struct Flags {
  std::optional<long> n, m;
  std::optional<double> p0;
  std::string prior = "bernoulli_gaussian";
  std::vector<double> sigma2;
  std::optional<int> trials;
  std::uint64_t seed = 1;
  std::vector<std::string> methods;
  std::string table;
  std::string out = "-";
  std::optional<double> lambda;
  std::vector<double> cdf_points;
  std::string instance;
  int max_iter = AdmmOptions{}.max_iter;
  double tol = AdmmOptions{}.tol;
  int threads = 0;
  bool serial = false;
};

struct Defaults {
  long n, m;
  double p0;
  std::vector<double> sigma2;
  int trials;
  std::vector<std::string> methods;
};

Defaults defaults_for(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::TheoremCheck:
      return {100, 90, 0.8, {1e-4, 1e-3, 1e-2, 1e-1}, 100, {}};
    case ExperimentKind::Cdf:
      return {100, 80, 0.9, {1e-3}, 1000,
              {"arm", "scaled_residual:0.1", "scaled_residual:0.01", "oracle_ml"}};
    case ExperimentKind::Nmse:
      return {200, 160, 0.9, {1e-4, 3.16227766016838e-4, 1e-3, 3.16227766016838e-3, 1e-2}, 500,
              {"arm", "scaled_residual:0.1", "scaled_residual:0.01", "oracle_ml", "ridge"}};
    case ExperimentKind::MseReconstruction:
      return {150, 120, 0.85, {1e-4, 1e-3, 1e-2}, 100, {"arm"}};
  }
  throw std::logic_error("unhandled kind");
}

ExperimentSpec make_spec(ExperimentKind kind, const Flags& f) {
  const Defaults d = defaults_for(kind);
  ExperimentSpec s;
  s.kind = kind;
  s.n = f.n.value_or(d.n);
  s.m = f.m.value_or(d.m);
  s.prior = parse_prior_kind(f.prior);
  s.p0 = f.p0.value_or(d.p0);
  s.sigma2 = f.sigma2.empty() ? d.sigma2 : f.sigma2;
  s.trials = f.trials.value_or(d.trials);
  s.seed = f.seed;
  for (const auto& name : f.methods.empty() ? d.methods : f.methods) {
    s.methods.push_back(Method::parse(name));
  }
  s.lambda = f.lambda.value_or(0.001);
  s.arm.solver.max_iter = f.max_iter;
  s.arm.solver.tol = f.tol;
  s.cdf_points = f.cdf_points;
  s.exec = f.serial ? Execution::Serial : Execution::Parallel;
  return s;
}

// Loads --table when the file exists; otherwise builds the standard table for
// (prior, M/N) and saves it there if a path was given.
ResidualTable obtain_table(const Flags& f, PriorKind prior, double delta) {
  if (!f.table.empty() && fs::exists(f.table)) {
    ResidualTable t = load_table(f.table);
    if (t.prior() != prior || std::abs(t.delta() - delta) > 1e-6) {
      throw std::invalid_argument("table " + f.table + " has prior " +
                                  std::string(to_string(t.prior())) + " and delta " +
                                  format_number(t.delta()) + "; expected " +
                                  std::string(to_string(prior)) + " and " + format_number(delta));
    }
    return t;
  }
  std::cerr << "building residual table (" << to_string(prior) << ", delta " << format_number(delta)
            << ")\n";
  ResidualTable t = build_table(TableConfig::standard(prior, delta),
                                f.serial ? Execution::Serial : Execution::Parallel);
  if (!f.table.empty()) {
    save_table(t, f.table);
    std::cerr << "saved " << f.table << "\n";
  }
  return t;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path != "-" && !path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw std::runtime_error("cannot open " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

int cmd_table_build(const Flags& f) {
  if (f.table.empty() && (f.out.empty() || f.out == "-")) {
    throw std::invalid_argument("table build: give --table or --out for the output file");
  }
  const PriorKind prior = parse_prior_kind(f.prior);
  const double delta = static_cast<double>(f.m.value_or(80)) / static_cast<double>(f.n.value_or(100));
  const ResidualTable t = build_table(TableConfig::standard(prior, delta),
                                      f.serial ? Execution::Serial : Execution::Parallel);
  const std::string path = f.table.empty() ? f.out : f.table;
  save_table(t, path);
  std::cout << path << " " << t.content_hash() << "\n";
  return 0;
}

int cmd_table_inspect(const Flags& f) {
  if (f.table.empty()) throw std::invalid_argument("table inspect: --table is required");
  const ResidualTable t = load_table(f.table);
  nlohmann::ordered_json j;
  j["prior"] = std::string(to_string(t.prior()));
  j["delta"] = t.delta();
  j["lambda_set"] = t.lambda_set();
  j["p0_range"] = {t.p0_min(), t.p0_max()};
  j["p0_points"] = t.p0_grid().size();
  j["sigma2_range"] = {t.sigma2_min(), t.sigma2_max()};
  j["sigma2_points"] = t.sigma2_grid().size();
  j["hash"] = t.content_hash();
  nlohmann::ordered_json ranges = nlohmann::ordered_json::array();
  for (std::size_t li = 0; li < t.lambda_set().size(); ++li) {
    double lo = t.value(li, 0, 0), hi = lo;
    for (std::size_t pi = 0; pi < t.p0_grid().size(); ++pi) {
      const auto c = t.curve(li, pi);
      lo = std::min(lo, c.front());
      hi = std::max(hi, c.back());
    }
    ranges.push_back({{"lambda", t.lambda_set()[li]}, {"beta2_min", lo}, {"beta2_max", hi}});
  }
  j["residual_ranges"] = ranges;
  Output out(f.out);
  out.stream() << j.dump(2) << "\n";
  return 0;
}

// Instance file: {"A": [[...], ...] (rows), "y": [...], optional "x", "sigma2", "p0"}.
ProblemInstance read_instance(const std::string& path, std::optional<double>& p0) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  const auto j = nlohmann::json::parse(in);
  const auto& rows = j.at("A");
  const Index m = static_cast<Index>(rows.size());
  if (m == 0) throw std::invalid_argument("instance: empty A");
  const Index n = static_cast<Index>(rows.at(0).size());
  ProblemInstance inst;
  inst.A.resize(m, n);
  for (Index i = 0; i < m; ++i) {
    if (static_cast<Index>(rows[i].size()) != n) throw std::invalid_argument("instance: ragged A");
    for (Index k = 0; k < n; ++k) inst.A(i, k) = rows[i][k].get<double>();
  }
  const auto y = j.at("y").get<std::vector<double>>();
  if (static_cast<Index>(y.size()) != m) throw std::invalid_argument("instance: y has wrong length");
  inst.y = Eigen::Map<const VectorXd>(y.data(), m);
  if (j.contains("x")) {
    const auto x = j["x"].get<std::vector<double>>();
    inst.x = Eigen::Map<const VectorXd>(x.data(), static_cast<Index>(x.size()));
    inst.v = inst.y - inst.A * inst.x;
  }
  if (j.contains("sigma2")) inst.sigma2_v = j["sigma2"].get<double>();
  if (j.contains("p0")) p0 = j["p0"].get<double>();
  return inst;
}

int cmd_estimate(const Flags& f) {
  std::optional<double> p0 = f.p0;
  ProblemInstance inst;
  if (!f.instance.empty()) {
    inst = read_instance(f.instance, p0);
  } else {
    const double s2 = f.sigma2.empty() ? 1e-3 : f.sigma2.front();
    Rng rng = trial_rng(f.seed, 0);
    inst = generate_instance(SignalPrior::make(parse_prior_kind(f.prior), p0.value_or(0.9)),
                             f.n.value_or(200), f.m.value_or(160), s2, rng);
    p0 = p0.value_or(0.9);
  }
  std::vector<Method> methods;
  for (const auto& name : f.methods.empty() ? std::vector<std::string>{"arm"} : f.methods) {
    methods.push_back(Method::parse(name));
  }

  std::optional<ResidualTable> table;
  for (const auto& mt : methods) {
    if (mt.needs_table() && !table) {
      table = obtain_table(f, parse_prior_kind(f.prior), inst.delta());
    }
  }
  ArmConfig arm;
  arm.solver.max_iter = f.max_iter;
  arm.solver.tol = f.tol;
  const LassoAdmm solver(inst.A, arm.solver);

  nlohmann::ordered_json j;
  j["n"] = inst.n();
  j["m"] = inst.m();
  if (!f.instance.empty()) {
    j["instance"] = f.instance;
  } else {
    j["seed"] = f.seed;
    j["sigma2"] = inst.sigma2_v;
  }
  j["table_hash"] = table ? table->content_hash() : "";
  int failures = 0;
  nlohmann::ordered_json est = nlohmann::ordered_json::object();
  for (const auto& mt : methods) {
    nlohmann::ordered_json r;
    try {
      if (mt.kind == Method::Kind::OracleMl && inst.x.size() == 0) {
        throw std::invalid_argument("oracle_ml needs the true x in the instance");
      }
      if (mt.kind == Method::Kind::ArmKnownP0 && !p0) {
        throw std::invalid_argument("arm_known needs --p0 or p0 in the instance");
      }
      const MethodOutcome o =
          run_method(mt, inst, solver, table ? &*table : nullptr, arm, p0.value_or(0.0));
      r["sigma2_hat"] = o.sigma2_hat;
      r["converged"] = o.converged;
    } catch (const MethodUnavailable&) {
      r["status"] = "unavailable";
    } catch (const std::exception& e) {
      r["status"] = std::string("failed: ") + e.what();
      ++failures;
    }
    est[mt.name()] = r;
  }
  j["estimates"] = est;
  Output out(f.out);
  out.stream() << j.dump() << "\n";
  return failures == 0 ? 0 : 1;
}

int cmd_experiment(ExperimentKind kind, const Flags& f) {
  const ExperimentSpec spec = make_spec(kind, f);
  spec.validate();
  std::optional<ResidualTable> table;
  if (kind != ExperimentKind::TheoremCheck) {
    for (const auto& mt : spec.methods) {
      if (mt.needs_table()) {
        table = obtain_table(f, spec.prior,
                             static_cast<double>(spec.m) / static_cast<double>(spec.n));
        break;
      }
    }
  }
  const ResidualTable* tp = table ? &*table : nullptr;
  const std::string hash = table ? table->content_hash() : "";

  // Results are fully computed before anything is written, so a failed run
  // never leaves a half-written file behind.
  std::ostringstream buf;
  int failures = 0;
  switch (kind) {
    case ExperimentKind::TheoremCheck: {
      const auto rows = run_theorem_check(spec);
      failures = count_failures(rows);
      write_csv(buf, spec, hash, rows);
      break;
    }
    case ExperimentKind::Cdf: {
      const auto res = run_cdf(spec, tp);
      failures = count_failures(res);
      write_csv(buf, spec, hash, res);
      break;
    }
    case ExperimentKind::Nmse: {
      const auto rows = run_nmse(spec, tp);
      failures = count_failures(rows);
      write_csv(buf, spec, hash, rows);
      break;
    }
    case ExperimentKind::MseReconstruction: {
      const auto rows = run_mse_reconstruction(spec, tp);
      failures = count_failures(rows);
      write_csv(buf, spec, hash, rows);
      break;
    }
  }
  Output out(f.out);
  out.stream() << buf.str();
  if (failures > 0) std::cerr << failures << " trial(s) failed\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noise-variance estimation for compressed sensing by asymptotic residual matching"};
  app.set_config("--config", "", "TOML or INI file; keys mirror the long flag names");
  app.require_subcommand(1);

  Flags f;
  app.add_option("--n", f.n, "Signal length N");
  app.add_option("--m", f.m, "Number of measurements M");
  app.add_option("--p0", f.p0, "Probability that an entry of x is zero");
  app.add_option("--prior", f.prior, "bernoulli_gaussian (bg) or bernoulli (binary)")
      ->capture_default_str();
  app.add_option("--sigma2", f.sigma2, "Noise variance(s)")->delimiter(',');
  app.add_option("--trials", f.trials, "Trials per noise level");
  app.add_option("--seed", f.seed, "Base seed; trial t uses seed + t")->capture_default_str();
  app.add_option("--methods", f.methods,
                 "arm, arm_known, scaled_residual:<lambda>, oracle_ml, ridge")
      ->delimiter(',');
  app.add_option("--table", f.table, "Residual table file (built and saved when missing)");
  app.add_option("--out", f.out, "Output file, - for stdout")->capture_default_str();
  app.add_option("--lambda", f.lambda, "Regularization for the theorem check (default 0.001)");
  app.add_option("--cdf-points", f.cdf_points, "Abscissae for the empirical CDF")
      ->delimiter(',');
  app.add_option("--instance", f.instance, "JSON instance for estimate");
  app.add_option("--max-iter", f.max_iter, "ADMM iteration cap")->capture_default_str();
  app.add_option("--tol", f.tol, "ADMM stopping tolerance")->capture_default_str();
  app.add_option("--threads", f.threads, "OpenMP threads (0 keeps the runtime default)");
  app.add_flag("--serial", f.serial, "Use the serial reference path");

  std::function<int()> action;
  auto* table = app.add_subcommand("table", "Build or inspect a residual table");
  table->require_subcommand(1);
  table->fallthrough();
  table->add_subcommand("build", "Compute and save the standard table for --prior and M/N")
      ->fallthrough()
      ->callback([&] { action = [&] { return cmd_table_build(f); }; });
  table->add_subcommand("inspect", "Summarize a saved table")
      ->fallthrough()
      ->callback([&] { action = [&] { return cmd_table_inspect(f); }; });

  app.add_subcommand("estimate", "Estimate the noise variance of one instance")
      ->fallthrough()
      ->callback([&] { action = [&] { return cmd_estimate(f); }; });

  auto* exp = app.add_subcommand("experiment", "Run a simulation and write CSV");
  exp->require_subcommand(1);
  exp->fallthrough();
  const std::pair<ExperimentKind, const char*> kinds[] = {
      {ExperimentKind::TheoremCheck, "Empirical vs predicted LASSO objective and residual"},
      {ExperimentKind::Cdf, "Empirical CDF of the estimates at one noise level"},
      {ExperimentKind::Nmse, "NMSE of the estimators against the noise variance"},
      {ExperimentKind::MseReconstruction, "Constrained recovery MSE with estimated vs true noise"},
  };
  for (const auto& entry : kinds) {
    const ExperimentKind kind = entry.first;
    exp->add_subcommand(std::string(to_string(kind)), entry.second)
        ->fallthrough()
        ->callback([&, kind] { action = [&, kind] { return cmd_experiment(kind, f); }; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (f.threads > 0) omp_set_num_threads(f.threads);
  try {
    return action();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
