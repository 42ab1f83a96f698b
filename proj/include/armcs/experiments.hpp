#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "armcs/admm.hpp"
#include "armcs/arm.hpp"
#include "armcs/parallel.hpp"
#include "armcs/problem.hpp"
#include "armcs/residual_table.hpp"

namespace armcs {

enum class ExperimentKind { TheoremCheck, Cdf, Nmse, MseReconstruction };

std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view name);

/// Noise-variance estimators selectable by name:
///   arm, arm_known (ARM with the true p0), scaled_residual:<lambda>,
///   oracle_ml, ridge (not implemented; always reported unavailable).
struct Method {
  enum class Kind { Arm, ArmKnownP0, ScaledResidual, OracleMl, Ridge };
  Kind kind = Kind::Arm;
  double lambda = 0.0;  ///< scaled_residual only

  std::string name() const;
  bool needs_table() const { return kind == Kind::Arm || kind == Kind::ArmKnownP0; }
  static Method parse(std::string_view text);
};

class MethodUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Smallest sigma2 handled anywhere; theorem-check rows at sigma2 = 0 are
/// compared against the prediction at this value.
inline constexpr double kSigma2Floor = 1e-6;

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::TheoremCheck;
  Index n = 100;
  Index m = 90;
  PriorKind prior = PriorKind::BernoulliGaussian;
  double p0 = 0.8;
  std::vector<double> sigma2{1e-4, 1e-3, 1e-2, 1e-1};
  int trials = 100;
  std::uint64_t seed = 1;
  std::vector<Method> methods;
  /// Regularization for the theorem check.
  double lambda = 0.001;
  ArmConfig arm;
  /// Points at which the CDF experiment evaluates each empirical CDF.
  std::vector<double> cdf_points;
  /// Runtime choice only: excluded from the JSON description and the hash.
  Execution exec = Execution::Parallel;

  void validate() const;
  /// Deterministic one-line JSON description of every field that affects results.
  std::string to_json() const;
  /// FNV-1a of to_json(), 16 hex digits.
  std::string config_hash() const;
};

/// One estimator applied to one instance.
struct MethodOutcome {
  double sigma2_hat = 0.0;
  bool converged = true;
};

/// true_p0 feeds arm_known only. Throws MethodUnavailable for ridge,
/// UndefinedEstimate for a degenerate scaled residual and
/// std::invalid_argument when an ARM method has no table.
MethodOutcome run_method(const Method& method, const ProblemInstance& instance,
                         const LassoAdmm& solver, const ResidualTable* table,
                         const ArmConfig& arm, double true_p0);

struct TheoremRow {
  double sigma2 = 0.0;
  int ok = 0;
  int failed = 0;
  int nonconverged = 0;
  double emp_objective = 0.0;
  double emp_residual = 0.0;
  double se_objective = 0.0;  ///< standard error of emp_objective
  double se_residual = 0.0;
  double pred_objective = 0.0;
  double pred_residual = 0.0;
  std::string status;  ///< "ok" or the first failure reason
};

struct CdfSample {
  std::string method;
  int trial = 0;
  double sigma2_hat = 0.0;
  bool failed = false;
  std::string reason;
};

struct CdfPoint {
  std::string method;
  double x = 0.0;
  double cdf = 0.0;
};

struct CdfResult {
  double sigma2 = 0.0;
  /// Successful samples sorted by estimate within each method, then failures
  /// in trial order.
  std::vector<CdfSample> samples;
  std::vector<CdfPoint> points;
  int failed = 0;
};

struct NmseRow {
  double sigma2 = 0.0;
  std::string method;
  int ok = 0;
  int failed = 0;
  int nonconverged = 0;
  double nmse = 0.0;
  double median_ratio = 0.0;  ///< median of sigma2_hat / sigma2
  double mean_estimate = 0.0;
  std::string status;
};

struct MseRow {
  double sigma2 = 0.0;
  std::string method;  ///< estimator behind epsilon = M sigma2_hat, or "ideal"
  int ok = 0;
  int failed = 0;
  int nonconverged = 0;
  double mse = 0.0;  ///< mean |x_hat_c - x|^2 / N
  std::string status;
};

std::vector<TheoremRow> run_theorem_check(const ExperimentSpec& spec);
CdfResult run_cdf(const ExperimentSpec& spec, const ResidualTable* table);
std::vector<NmseRow> run_nmse(const ExperimentSpec& spec, const ResidualTable* table);
std::vector<MseRow> run_mse_reconstruction(const ExperimentSpec& spec,
                                           const ResidualTable* table);

/// Failure count over all rows of a result.
int count_failures(const std::vector<TheoremRow>& rows);
int count_failures(const CdfResult& result);
int count_failures(const std::vector<NmseRow>& rows);
int count_failures(const std::vector<MseRow>& rows);

/// Source revision baked in at build time.
std::string_view git_revision();

/// "# {json}" header: spec, config hash, git revision and table hash (empty
/// when no table was used).
std::string csv_header(const ExperimentSpec& spec, const std::string& table_hash);

void write_csv(std::ostream& os, const ExperimentSpec& spec, const std::string& table_hash,
               const std::vector<TheoremRow>& rows);
void write_csv(std::ostream& os, const ExperimentSpec& spec, const std::string& table_hash,
               const CdfResult& result);
void write_csv(std::ostream& os, const ExperimentSpec& spec, const std::string& table_hash,
               const std::vector<NmseRow>& rows);
void write_csv(std::ostream& os, const ExperimentSpec& spec, const std::string& table_hash,
               const std::vector<MseRow>& rows);

/// Shortest round-trip representation used for every number in the CSVs.
std::string format_number(double value);

/// FNV-1a 64-bit of a byte string, 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace armcs
