#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "armcs/asymptotics.hpp"
#include "armcs/parallel.hpp"

namespace armcs {

/// Grid description for a residual table. Values are computed for every
/// (lambda, p0, sigma2) combination at a fixed prior kind and delta.
struct TableConfig {
  PriorKind prior = PriorKind::BernoulliGaussian;
  double delta = 0.8;
  std::vector<double> lambda_set{0.1, 0.05, 0.01, 0.005};
  std::vector<double> p0_grid;      ///< descending, e.g. 0.99, 0.98, ...
  std::vector<double> sigma2_grid;  ///< ascending, log-spaced
  SaddleOptions saddle;

  /// 60 log-spaced sigma2 in [1e-6, 10^0.5], p0 from 0.99 down to 0.50.
  static TableConfig standard(PriorKind prior, double delta, std::vector<double> lambda_set = {
                                                                 0.1, 0.05, 0.01, 0.005});
};

std::vector<double> log_spaced(double lo, double hi, std::size_t count);
/// 0.99, 0.98, ... down to floor (inclusive), computed as k/100.
std::vector<double> p0_grid_down_to(double floor);

class TableRangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class TableBuildError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precomputed beta*^2 over (lambda, p0, sigma2). Immutable once built.
class ResidualTable {
 public:
  static constexpr int kFormatVersion = 1;

  ResidualTable(TableConfig config, std::vector<double> values);

  const TableConfig& config() const { return config_; }
  PriorKind prior() const { return config_.prior; }
  double delta() const { return config_.delta; }
  const std::vector<double>& sigma2_grid() const { return config_.sigma2_grid; }
  const std::vector<double>& p0_grid() const { return config_.p0_grid; }
  const std::vector<double>& lambda_set() const { return config_.lambda_set; }
  double p0_min() const;
  double p0_max() const;
  double sigma2_min() const { return config_.sigma2_grid.front(); }
  double sigma2_max() const { return config_.sigma2_grid.back(); }

  double value(std::size_t lambda_idx, std::size_t p0_idx, std::size_t sigma2_idx) const;
  /// Residual curve over the sigma2 grid for one (lambda, p0) cell.
  std::vector<double> curve(std::size_t lambda_idx, std::size_t p0_idx) const;

  /// Throws TableRangeError when lambda is not in the set.
  std::size_t lambda_index(double lambda) const;
  /// Index of the grid p0 nearest to p0; throws TableRangeError outside the grid range.
  std::size_t nearest_p0_index(double p0) const;

  /// FNV-1a over the bit patterns of the metadata and values, as 16 hex digits.
  std::string content_hash() const;

  const std::vector<double>& values() const { return values_; }

 private:
  TableConfig config_;
  std::vector<double> values_;
};

/// Solves one saddle problem per grid cell. Strict monotonicity of every curve
/// in sigma2 is checked; violations and bracket failures raise TableBuildError
/// naming the cell.
ResidualTable build_table(const TableConfig& config, Execution exec = Execution::Parallel);

void save_table(const ResidualTable& table, const std::filesystem::path& path);
/// Verifies format version and content hash.
ResidualTable load_table(const std::filesystem::path& path);
std::string serialize_table(const ResidualTable& table);
ResidualTable deserialize_table(const std::string& text);

/// beta*^2 with p0 snapped to the nearest grid value and linear interpolation
/// of log(beta*^2) against log(sigma2). Throws TableRangeError when sigma2 is
/// outside the grid or lambda is not tabulated.
double lookup_residual(const ResidualTable& table, double sigma2, double p0, double lambda);

}  // namespace armcs
