#include "armcs/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>

#include "armcs/asymptotics.hpp"
#include "armcs/baselines.hpp"
#include "json.hpp"

#ifndef ARMCS_GIT_REV
#define ARMCS_GIT_REV "unknown"
#endif

namespace armcs {

namespace {

using ordered_json = nlohmann::ordered_json;

const double kSigma2Ceiling = std::sqrt(10.0);

// Result of one estimator or solver call inside a trial.
struct Cell {
  double value = 0.0;
  double aux = 0.0;
  bool converged = true;
  bool failed = false;
  bool unavailable = false;
  std::string reason;
};

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  return s;
}

template <typename F>
Cell guarded(F&& f) {
  Cell c;
  try {
    f(c);
  } catch (const MethodUnavailable& e) {
    c.unavailable = true;
    c.reason = "unavailable";
  } catch (const std::exception& e) {
    c.failed = true;
    c.reason = sanitize(e.what());
  }
  return c;
}

SignalPrior spec_prior(const ExperimentSpec& spec) { return SignalPrior::make(spec.prior, spec.p0); }

void check_table(const ExperimentSpec& spec, const ResidualTable* table) {
  const bool needed = std::any_of(spec.methods.begin(), spec.methods.end(),
                                  [](const Method& m) { return m.needs_table(); });
  if (!needed) return;
  if (table == nullptr) throw std::invalid_argument("experiment: ARM methods need a residual table");
  if (table->prior() != spec.prior) {
    throw std::invalid_argument("experiment: table prior does not match the experiment prior");
  }
  const double delta = static_cast<double>(spec.m) / static_cast<double>(spec.n);
  if (std::abs(table->delta() - delta) > 1e-6) {
    throw std::invalid_argument("experiment: table delta does not match M/N");
  }
}

std::string status_of(int failed, const std::string& first_reason) {
  return failed == 0 ? "ok" : "failed: " + first_reason;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

std::string num_or_empty(bool present, double v) { return present ? format_number(v) : ""; }

// Runs body(trial, cells) for every trial; cells has one slot per
// (sigma2, column) and is written only by its own trial.
template <typename Body>
std::vector<std::vector<Cell>> run_trials(const ExperimentSpec& spec, std::size_t columns,
                                          Body&& body) {
  std::vector<std::vector<Cell>> out(static_cast<std::size_t>(spec.trials));
  for_each_index(out.size(), spec.exec, [&](std::size_t t) {
    out[t].assign(spec.sigma2.size() * columns, Cell{});
    try {
      body(static_cast<int>(t), out[t]);
    } catch (const std::exception& e) {
      for (Cell& c : out[t]) {
        if (!c.failed && !c.unavailable && c.reason.empty()) {
          c.failed = true;
          c.reason = sanitize(e.what());
        }
      }
    }
  });
  return out;
}

// Instance for trial t at one noise level. Every sigma2 of a trial shares A,
// x and the standardized noise, so one solver factorization serves them all.
ProblemInstance trial_instance(const ExperimentSpec& spec, int t, double sigma2) {
  Rng rng = trial_rng(spec.seed, static_cast<std::uint64_t>(t));
  return generate_instance(spec_prior(spec), spec.n, spec.m, sigma2, rng);
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::TheoremCheck: return "theorem";
    case ExperimentKind::Cdf: return "cdf";
    case ExperimentKind::Nmse: return "nmse";
    case ExperimentKind::MseReconstruction: return "mse";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  if (name == "theorem" || name == "theorem_check") return ExperimentKind::TheoremCheck;
  if (name == "cdf") return ExperimentKind::Cdf;
  if (name == "nmse") return ExperimentKind::Nmse;
  if (name == "mse" || name == "mse_reconstruction") return ExperimentKind::MseReconstruction;
  throw std::invalid_argument("unknown experiment kind: " + std::string(name));
}

std::string Method::name() const {
  switch (kind) {
    case Kind::Arm: return "arm";
    case Kind::ArmKnownP0: return "arm_known";
    case Kind::ScaledResidual: return "scaled_residual:" + format_number(lambda);
    case Kind::OracleMl: return "oracle_ml";
    case Kind::Ridge: return "ridge";
  }
  return "unknown";
}

Method Method::parse(std::string_view text) {
  if (text == "arm") return {Kind::Arm, 0.0};
  if (text == "arm_known") return {Kind::ArmKnownP0, 0.0};
  if (text == "oracle_ml") return {Kind::OracleMl, 0.0};
  if (text == "ridge") return {Kind::Ridge, 0.0};
  constexpr std::string_view prefix = "scaled_residual:";
  if (text.substr(0, prefix.size()) == prefix) {
    const std::string_view rest = text.substr(prefix.size());
    double lambda = 0.0;
    const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), lambda);
    if (ec != std::errc() || ptr != rest.data() + rest.size() || !(lambda > 0.0)) {
      throw std::invalid_argument("bad lambda in method: " + std::string(text));
    }
    return {Kind::ScaledResidual, lambda};
  }
  throw std::invalid_argument("unknown method: " + std::string(text));
}

void ExperimentSpec::validate() const {
  if (n < 1 || m < 1) throw std::invalid_argument("experiment: N and M must be positive");
  if (trials < 1) throw std::invalid_argument("experiment: trials must be >= 1");
  if (!(p0 >= 0.0 && p0 < 1.0)) throw std::invalid_argument("experiment: p0 outside [0,1)");
  if (sigma2.empty()) throw std::invalid_argument("experiment: empty sigma2 list");
  const double lo = kind == ExperimentKind::TheoremCheck ? 0.0 : kSigma2Floor;
  for (double s : sigma2) {
    const bool zero_ok = kind == ExperimentKind::TheoremCheck && s == 0.0;
    if (!zero_ok && !(s >= kSigma2Floor * (1 - 1e-12) && s <= kSigma2Ceiling * (1 + 1e-12))) {
      throw std::invalid_argument("experiment: sigma2 " + format_number(s) +
                                  " outside the table grid [1e-6, 10^0.5]" +
                                  (lo == 0.0 ? " (0 is also accepted here)" : ""));
    }
  }
  if (kind == ExperimentKind::Cdf && sigma2.size() != 1) {
    throw std::invalid_argument("experiment: cdf takes exactly one sigma2");
  }
  if (kind == ExperimentKind::TheoremCheck) {
    if (!(lambda > 0.0)) throw std::invalid_argument("experiment: lambda must be positive");
  } else if (methods.empty()) {
    throw std::invalid_argument("experiment: no methods given");
  }
  arm.validate();
}

std::string ExperimentSpec::to_json() const {
  ordered_json j;
  j["kind"] = std::string(to_string(kind));
  j["n"] = n;
  j["m"] = m;
  j["prior"] = std::string(to_string(prior));
  j["p0"] = p0;
  j["sigma2"] = sigma2;
  j["trials"] = trials;
  j["seed"] = seed;
  std::vector<std::string> names;
  for (const Method& mt : methods) names.push_back(mt.name());
  j["methods"] = names;
  j["lambda"] = lambda;
  ordered_json a;
  a["lambda1"] = arm.lambda1;
  a["lambda_set"] = arm.lambda_set;
  a["reset_thresholds"] = arm.reset_thresholds;
  a["known_p0"] = arm.known_p0 ? ordered_json(*arm.known_p0) : ordered_json(nullptr);
  j["arm"] = a;
  ordered_json s;
  s["rho"] = arm.solver.rho;
  s["adaptive_rho"] = arm.solver.adaptive_rho;
  s["tol"] = arm.solver.tol;
  s["max_iter"] = arm.solver.max_iter;
  j["solver"] = s;
  j["cdf_points"] = cdf_points;
  return j.dump();
}

std::string ExperimentSpec::config_hash() const { return fnv1a_hex(to_json()); }

MethodOutcome run_method(const Method& method, const ProblemInstance& instance,
                         const LassoAdmm& solver, const ResidualTable* table,
                         const ArmConfig& arm, double true_p0) {
  switch (method.kind) {
    case Method::Kind::Arm:
    case Method::Kind::ArmKnownP0: {
      if (table == nullptr) throw std::invalid_argument("ARM needs a residual table");
      ArmConfig cfg = arm;
      if (method.kind == Method::Kind::ArmKnownP0) cfg.known_p0 = true_p0;
      const EstimationReport rep = arm_estimate(solver, instance.y, cfg, *table);
      return {rep.sigma2_hat, rep.converged};
    }
    case Method::Kind::ScaledResidual: {
      const ScaledResidualResult r = scaled_residual_estimate(solver, instance.y, method.lambda);
      return {r.sigma2_hat, r.converged};
    }
    case Method::Kind::OracleMl:
      return {oracle_ml_estimate(instance), true};
    case Method::Kind::Ridge:
      throw MethodUnavailable("ridge estimator is not implemented");
  }
  throw std::logic_error("unhandled method");
}

std::vector<TheoremRow> run_theorem_check(const ExperimentSpec& spec) {
  spec.validate();
  if (spec.kind != ExperimentKind::TheoremCheck) throw std::invalid_argument("not a theorem check");
  const double delta = static_cast<double>(spec.m) / static_cast<double>(spec.n);
  const std::size_t k = spec.sigma2.size();

  std::vector<TheoremRow> rows(k);
  std::vector<std::string> pred_error(k);
  for (std::size_t i = 0; i < k; ++i) {
    rows[i].sigma2 = spec.sigma2[i];
    try {
      const ScalarProblem sp{delta, std::max(spec.sigma2[i], kSigma2Floor), spec.lambda,
                             spec_prior(spec)};
      const SaddlePoint pt = solve_saddle(sp);
      rows[i].pred_objective = pt.predicted_objective();
      rows[i].pred_residual = pt.predicted_residual();
    } catch (const std::exception& e) {
      pred_error[i] = sanitize(e.what());
    }
  }

  const auto cells = run_trials(spec, 1, [&](int t, std::vector<Cell>& out) {
    const LassoAdmm solver(trial_instance(spec, t, 0.0).A, spec.arm.solver);
    for (std::size_t i = 0; i < k; ++i) {
      out[i] = guarded([&](Cell& c) {
        const ProblemInstance inst = trial_instance(spec, t, spec.sigma2[i]);
        const RegularizedSolution sol = solver.solve_regularized(inst.y, spec.lambda);
        c.value = sol.objective_per_n;
        c.aux = sol.residual_per_n;
        c.converged = sol.converged;
      });
    }
  });

  for (std::size_t i = 0; i < k; ++i) {
    TheoremRow& r = rows[i];
    std::string first;
    double obj = 0.0, res = 0.0, obj2 = 0.0, res2 = 0.0;
    for (const auto& trial : cells) {
      const Cell& c = trial[i];
      if (c.failed) {
        if (r.failed++ == 0) first = c.reason;
        continue;
      }
      ++r.ok;
      r.nonconverged += c.converged ? 0 : 1;
      obj += c.value;
      res += c.aux;
      obj2 += c.value * c.value;
      res2 += c.aux * c.aux;
    }
    if (r.ok > 0) {
      r.emp_objective = obj / r.ok;
      r.emp_residual = res / r.ok;
    }
    if (r.ok > 1) {
      auto se = [n = r.ok](double sum, double sum2) {
        const double var = std::max(0.0, (sum2 - sum * sum / n) / (n - 1));
        return std::sqrt(var / n);
      };
      r.se_objective = se(obj, obj2);
      r.se_residual = se(res, res2);
    }
    if (!pred_error[i].empty()) {
      r.failed = spec.trials;
      r.ok = 0;
      first = "prediction: " + pred_error[i];
    }
    r.status = status_of(r.failed, first);
  }
  return rows;
}

CdfResult run_cdf(const ExperimentSpec& spec, const ResidualTable* table) {
  spec.validate();
  if (spec.kind != ExperimentKind::Cdf) throw std::invalid_argument("not a cdf experiment");
  check_table(spec, table);
  const std::size_t nm = spec.methods.size();
  const double sigma2 = spec.sigma2.front();

  const auto cells = run_trials(spec, nm, [&](int t, std::vector<Cell>& out) {
    const ProblemInstance inst = trial_instance(spec, t, sigma2);
    const LassoAdmm solver(inst.A, spec.arm.solver);
    for (std::size_t j = 0; j < nm; ++j) {
      out[j] = guarded([&](Cell& c) {
        const MethodOutcome o = run_method(spec.methods[j], inst, solver, table, spec.arm, spec.p0);
        c.value = o.sigma2_hat;
        c.converged = o.converged;
      });
    }
  });

  std::vector<double> xs = spec.cdf_points;
  if (xs.empty()) xs = log_spaced(sigma2 / 10.0, sigma2 * 10.0, 41);

  CdfResult result;
  result.sigma2 = sigma2;
  for (std::size_t j = 0; j < nm; ++j) {
    const std::string name = spec.methods[j].name();
    std::vector<CdfSample> ok, bad;
    for (int t = 0; t < spec.trials; ++t) {
      const Cell& c = cells[static_cast<std::size_t>(t)][j];
      CdfSample s{name, t, c.value, c.failed || c.unavailable, c.reason};
      (s.failed ? bad : ok).push_back(std::move(s));
      if (c.failed) ++result.failed;
    }
    std::stable_sort(ok.begin(), ok.end(), [](const CdfSample& a, const CdfSample& b) {
      return a.sigma2_hat < b.sigma2_hat;
    });
    for (double x : xs) {
      const auto below = std::count_if(ok.begin(), ok.end(),
                                       [x](const CdfSample& s) { return s.sigma2_hat <= x; });
      const double frac = ok.empty() ? 0.0 : static_cast<double>(below) / ok.size();
      result.points.push_back({name, x, frac});
    }
    result.samples.insert(result.samples.end(), ok.begin(), ok.end());
    result.samples.insert(result.samples.end(), bad.begin(), bad.end());
  }
  return result;
}

std::vector<NmseRow> run_nmse(const ExperimentSpec& spec, const ResidualTable* table) {
  spec.validate();
  if (spec.kind != ExperimentKind::Nmse) throw std::invalid_argument("not an nmse experiment");
  check_table(spec, table);
  const std::size_t nm = spec.methods.size();
  const std::size_t k = spec.sigma2.size();

  const auto cells = run_trials(spec, nm, [&](int t, std::vector<Cell>& out) {
    const LassoAdmm solver(trial_instance(spec, t, 0.0).A, spec.arm.solver);
    for (std::size_t i = 0; i < k; ++i) {
      const ProblemInstance inst = trial_instance(spec, t, spec.sigma2[i]);
      for (std::size_t j = 0; j < nm; ++j) {
        out[i * nm + j] = guarded([&](Cell& c) {
          const MethodOutcome o =
              run_method(spec.methods[j], inst, solver, table, spec.arm, spec.p0);
          c.value = o.sigma2_hat;
          c.converged = o.converged;
        });
      }
    }
  });

  std::vector<NmseRow> rows;
  for (std::size_t i = 0; i < k; ++i) {
    const double s2 = spec.sigma2[i];
    for (std::size_t j = 0; j < nm; ++j) {
      NmseRow r;
      r.sigma2 = s2;
      r.method = spec.methods[j].name();
      std::string first;
      bool unavailable = false;
      std::vector<double> ratios;
      double err = 0.0, sum = 0.0;
      for (const auto& trial : cells) {
        const Cell& c = trial[i * nm + j];
        if (c.unavailable) {
          unavailable = true;
          continue;
        }
        if (c.failed) {
          if (r.failed++ == 0) first = c.reason;
          continue;
        }
        ++r.ok;
        r.nonconverged += c.converged ? 0 : 1;
        const double d = (c.value - s2) / s2;
        err += d * d;
        sum += c.value;
        ratios.push_back(c.value / s2);
      }
      if (r.ok > 0) {
        r.nmse = err / r.ok;
        r.mean_estimate = sum / r.ok;
        r.median_ratio = median(ratios);
      }
      r.status = unavailable ? "unavailable" : status_of(r.failed, first);
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

std::vector<MseRow> run_mse_reconstruction(const ExperimentSpec& spec,
                                           const ResidualTable* table) {
  spec.validate();
  if (spec.kind != ExperimentKind::MseReconstruction) {
    throw std::invalid_argument("not an mse experiment");
  }
  check_table(spec, table);
  const std::size_t nm = spec.methods.size();
  const std::size_t cols = nm + 1;  // last column: epsilon from the true sigma2
  const std::size_t k = spec.sigma2.size();

  const auto cells = run_trials(spec, cols, [&](int t, std::vector<Cell>& out) {
    const LassoAdmm solver(trial_instance(spec, t, 0.0).A, spec.arm.solver);
    const double m = static_cast<double>(spec.m);
    const double n = static_cast<double>(spec.n);
    for (std::size_t i = 0; i < k; ++i) {
      const ProblemInstance inst = trial_instance(spec, t, spec.sigma2[i]);
      for (std::size_t j = 0; j < cols; ++j) {
        out[i * cols + j] = guarded([&](Cell& c) {
          double s2 = spec.sigma2[i];
          bool conv = true;
          if (j < nm) {
            const MethodOutcome o =
                run_method(spec.methods[j], inst, solver, table, spec.arm, spec.p0);
            s2 = o.sigma2_hat;
            conv = o.converged;
          }
          const ConstrainedSolution sol = solver.solve_constrained(inst.y, m * s2);
          c.value = (sol.x_hat_c - inst.x).squaredNorm() / n;
          c.converged = conv && sol.converged;
        });
      }
    }
  });

  std::vector<MseRow> rows;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      MseRow r;
      r.sigma2 = spec.sigma2[i];
      r.method = j < nm ? spec.methods[j].name() : "ideal";
      std::string first;
      bool unavailable = false;
      double sum = 0.0;
      for (const auto& trial : cells) {
        const Cell& c = trial[i * cols + j];
        if (c.unavailable) {
          unavailable = true;
          continue;
        }
        if (c.failed) {
          if (r.failed++ == 0) first = c.reason;
          continue;
        }
        ++r.ok;
        r.nonconverged += c.converged ? 0 : 1;
        sum += c.value;
      }
      if (r.ok > 0) r.mse = sum / r.ok;
      r.status = unavailable ? "unavailable" : status_of(r.failed, first);
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

int count_failures(const std::vector<TheoremRow>& rows) {
  int f = 0;
  for (const auto& r : rows) f += r.failed;
  return f;
}

int count_failures(const CdfResult& result) { return result.failed; }

int count_failures(const std::vector<NmseRow>& rows) {
  int f = 0;
  for (const auto& r : rows) f += r.failed;
  return f;
}

int count_failures(const std::vector<MseRow>& rows) {
  int f = 0;
  for (const auto& r : rows) f += r.failed;
  return f;
}

std::string_view git_revision() { return ARMCS_GIT_REV; }

std::string csv_header(const ExperimentSpec& spec, const std::string& table_hash) {
  ordered_json h;
  h["format"] = "armcs-experiment";
  h["spec"] = ordered_json::parse(spec.to_json());
  h["config_hash"] = spec.config_hash();
  h["git_rev"] = std::string(git_revision());
  h["table_hash"] = table_hash;
  return "# " + h.dump() + "\n";
}

void write_csv(std::ostream& os, const ExperimentSpec& spec, const std::string& table_hash,
               const std::vector<TheoremRow>& rows) {
  const std::string hash = spec.config_hash();
  os << csv_header(spec, table_hash);
  os << "seed,trials,config_hash,sigma2,ok,failed,nonconverged,emp_objective,emp_residual,"
        "se_objective,se_residual,pred_objective,pred_residual,rel_err_objective,rel_err_residual,status\n";
  for (const auto& r : rows) {
    const bool e = r.ok > 0;
    const bool p = r.pred_residual > 0.0;
    os << spec.seed << ',' << spec.trials << ',' << hash << ',' << format_number(r.sigma2) << ','
       << r.ok << ',' << r.failed << ',' << r.nonconverged << ','
       << num_or_empty(e, r.emp_objective) << ',' << num_or_empty(e, r.emp_residual) << ','
       << num_or_empty(e, r.se_objective) << ',' << num_or_empty(e, r.se_residual) << ','
       << num_or_empty(p, r.pred_objective) << ',' << num_or_empty(p, r.pred_residual) << ','
       << num_or_empty(e && p, r.emp_objective / r.pred_objective - 1.0) << ','
       << num_or_empty(e && p, r.emp_residual / r.pred_residual - 1.0) << ',' << r.status
       << '\n';
  }
}

void write_csv(std::ostream& os, const ExperimentSpec& spec, const std::string& table_hash,
               const CdfResult& result) {
  const std::string hash = spec.config_hash();
  os << csv_header(spec, table_hash);
  os << "record,method,seed,trial,config_hash,sigma2,value,cdf,reason\n";
  std::map<std::string, std::size_t> ok_count;
  for (const auto& s : result.samples)
    if (!s.failed) ++ok_count[s.method];
  std::map<std::string, std::size_t> rank;
  for (const auto& s : result.samples) {
    os << (s.failed ? "failed" : "sample") << ',' << s.method << ',' << spec.seed << ','
       << s.trial << ',' << hash << ',' << format_number(result.sigma2) << ',';
    if (s.failed) {
      os << ",," << s.reason << '\n';
    } else {
      const double c = static_cast<double>(++rank[s.method]) / ok_count[s.method];
      os << format_number(s.sigma2_hat) << ',' << format_number(c) << ",\n";
    }
  }
  for (const auto& p : result.points) {
    os << "cdf," << p.method << ',' << spec.seed << ",," << hash << ','
       << format_number(result.sigma2) << ',' << format_number(p.x) << ','
       << format_number(p.cdf) << ",\n";
  }
}

void write_csv(std::ostream& os, const ExperimentSpec& spec, const std::string& table_hash,
               const std::vector<NmseRow>& rows) {
  const std::string hash = spec.config_hash();
  os << csv_header(spec, table_hash);
  os << "seed,trials,config_hash,sigma2,method,ok,failed,nonconverged,nmse,median_ratio,"
        "mean_estimate,status\n";
  for (const auto& r : rows) {
    const bool e = r.ok > 0;
    os << spec.seed << ',' << spec.trials << ',' << hash << ',' << format_number(r.sigma2) << ','
       << r.method << ',' << r.ok << ',' << r.failed << ',' << r.nonconverged << ','
       << num_or_empty(e, r.nmse) << ',' << num_or_empty(e, r.median_ratio) << ','
       << num_or_empty(e, r.mean_estimate) << ',' << r.status << '\n';
  }
}

void write_csv(std::ostream& os, const ExperimentSpec& spec, const std::string& table_hash,
               const std::vector<MseRow>& rows) {
  const std::string hash = spec.config_hash();
  os << csv_header(spec, table_hash);
  os << "seed,trials,config_hash,sigma2,method,ok,failed,nonconverged,mse,mse_db,status\n";
  for (const auto& r : rows) {
    const bool e = r.ok > 0;
    os << spec.seed << ',' << spec.trials << ',' << hash << ',' << format_number(r.sigma2) << ','
       << r.method << ',' << r.ok << ',' << r.failed << ',' << r.nonconverged << ','
       << num_or_empty(e, r.mse) << ',' << num_or_empty(e && r.mse > 0, 10.0 * std::log10(r.mse))
       << ',' << r.status << '\n';
  }
}

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("format_number failed");
  return std::string(buf, ptr);
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace armcs
