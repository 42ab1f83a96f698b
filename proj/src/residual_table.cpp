#include "armcs/residual_table.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace armcs {

namespace {

using ordered_json = nlohmann::ordered_json;

class Fnv1a {
 public:
  void add(std::uint64_t word) {
    for (int i = 0; i < 8; ++i) {
      state_ ^= (word >> (8 * i)) & 0xffu;
      state_ *= 0x100000001b3ull;
    }
  }
  void add(double v) { add(std::bit_cast<std::uint64_t>(v)); }
  void add(const std::vector<double>& vs) {
    add(static_cast<std::uint64_t>(vs.size()));
    for (double v : vs) add(v);
  }
  std::string hex() const {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << state_;
    return os.str();
  }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ull;
};

bool same_value(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

void validate_config(const TableConfig& c) {
  if (c.lambda_set.empty() || c.p0_grid.empty() || c.sigma2_grid.size() < 2) {
    throw std::invalid_argument("residual table: grids must be nonempty (sigma2 needs >= 2 points)");
  }
  if (!(c.delta > 0.0)) throw std::invalid_argument("residual table: delta must be positive");
  for (std::size_t i = 1; i < c.sigma2_grid.size(); ++i) {
    if (!(c.sigma2_grid[i] > c.sigma2_grid[i - 1])) {
      throw std::invalid_argument("residual table: sigma2 grid must be strictly increasing");
    }
  }
  if (!(c.sigma2_grid.front() > 0.0)) {
    throw std::invalid_argument("residual table: sigma2 grid must be positive");
  }
  for (double lam : c.lambda_set)
    if (!(lam > 0.0)) throw std::invalid_argument("residual table: lambda must be positive");
  for (double p0 : c.p0_grid)
    if (!(p0 >= 0.0 && p0 < 1.0)) throw std::invalid_argument("residual table: p0 outside [0,1)");
}

ordered_json header_json(const ResidualTable& t) {
  const TableConfig& c = t.config();
  ordered_json h;
  h["format"] = "armcs-residual-table";
  h["format_version"] = ResidualTable::kFormatVersion;
  h["prior"] = std::string(to_string(c.prior));
  h["delta"] = c.delta;
  h["lambda_set"] = c.lambda_set;
  h["p0_grid"] = c.p0_grid;
  h["sigma2_grid"] = c.sigma2_grid;
  h["saddle"] = {{"alpha_lo", c.saddle.alpha_lo},   {"alpha_hi", c.saddle.alpha_hi},
                 {"beta_lo", c.saddle.beta_lo},     {"beta_hi", c.saddle.beta_hi},
                 {"tol_search", c.saddle.tol_search}, {"max_expansions", c.saddle.max_expansions}};
  h["hash"] = t.content_hash();
  return h;
}

}  // namespace

TableConfig TableConfig::standard(PriorKind prior, double delta, std::vector<double> lambda_set) {
  TableConfig c;
  c.prior = prior;
  c.delta = delta;
  c.lambda_set = std::move(lambda_set);
  c.p0_grid = p0_grid_down_to(0.5);
  c.sigma2_grid = log_spaced(1e-6, std::pow(10.0, 0.5), 60);
  return c;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0 && hi > lo) || count < 2) {
    throw std::invalid_argument("log_spaced: need 0 < lo < hi and count >= 2");
  }
  std::vector<double> out(count);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> p0_grid_down_to(double floor) {
  std::vector<double> out;
  for (int k = 99; k >= 0; --k) {
    const double p0 = k / 100.0;
    if (p0 < floor - 1e-12) break;
    out.push_back(p0);
  }
  if (out.empty()) throw std::invalid_argument("p0 grid floor above 0.99");
  return out;
}

ResidualTable::ResidualTable(TableConfig config, std::vector<double> values)
    : config_(std::move(config)), values_(std::move(values)) {
  validate_config(config_);
  const std::size_t expected =
      config_.lambda_set.size() * config_.p0_grid.size() * config_.sigma2_grid.size();
  if (values_.size() != expected) throw std::invalid_argument("residual table: value count mismatch");
}

double ResidualTable::p0_min() const {
  return *std::min_element(config_.p0_grid.begin(), config_.p0_grid.end());
}

double ResidualTable::p0_max() const {
  return *std::max_element(config_.p0_grid.begin(), config_.p0_grid.end());
}

double ResidualTable::value(std::size_t li, std::size_t pi, std::size_t si) const {
  const std::size_t ns = config_.sigma2_grid.size();
  return values_[(li * config_.p0_grid.size() + pi) * ns + si];
}

std::vector<double> ResidualTable::curve(std::size_t li, std::size_t pi) const {
  const std::size_t ns = config_.sigma2_grid.size();
  const auto first = values_.begin() + static_cast<std::ptrdiff_t>((li * config_.p0_grid.size() + pi) * ns);
  return {first, first + static_cast<std::ptrdiff_t>(ns)};
}

std::size_t ResidualTable::lambda_index(double lambda) const {
  for (std::size_t i = 0; i < config_.lambda_set.size(); ++i)
    if (same_value(lambda, config_.lambda_set[i])) return i;
  throw TableRangeError("lambda " + std::to_string(lambda) + " is not tabulated");
}

std::size_t ResidualTable::nearest_p0_index(double p0) const {
  const double half_step = config_.p0_grid.size() > 1
                               ? 0.5 * std::abs(config_.p0_grid[0] - config_.p0_grid[1])
                               : 1e-12;
  if (p0 < p0_min() - half_step - 1e-12 || p0 > p0_max() + half_step + 1e-12) {
    throw TableRangeError("p0 " + std::to_string(p0) + " outside the tabulated range");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < config_.p0_grid.size(); ++i) {
    if (std::abs(config_.p0_grid[i] - p0) < std::abs(config_.p0_grid[best] - p0)) best = i;
  }
  return best;
}

std::string ResidualTable::content_hash() const {
  Fnv1a h;
  h.add(static_cast<std::uint64_t>(kFormatVersion));
  h.add(static_cast<std::uint64_t>(config_.prior));
  h.add(config_.delta);
  h.add(config_.lambda_set);
  h.add(config_.p0_grid);
  h.add(config_.sigma2_grid);
  h.add(values_);
  return h.hex();
}

ResidualTable build_table(const TableConfig& config, Execution exec) {
  validate_config(config);
  const std::size_t nl = config.lambda_set.size();
  const std::size_t np = config.p0_grid.size();
  const std::size_t ns = config.sigma2_grid.size();
  std::vector<double> values(nl * np * ns);

  for_each_index(values.size(), exec, [&](std::size_t idx) {
    const std::size_t si = idx % ns;
    const std::size_t pi = (idx / ns) % np;
    const std::size_t li = idx / (ns * np);
    ScalarProblem sp{config.delta, config.sigma2_grid[si], config.lambda_set[li],
                     SignalPrior::make(config.prior, config.p0_grid[pi])};
    try {
      values[idx] = asymptotic_residual(sp, config.saddle);
    } catch (const BracketFailure& e) {
      std::ostringstream msg;
      msg << "table cell (lambda=" << sp.lambda << ", p0=" << sp.prior.p0()
          << ", sigma2=" << sp.sigma2 << "): " << e.what();
      throw TableBuildError(msg.str());
    }
  });

  for (std::size_t li = 0; li < nl; ++li) {
    for (std::size_t pi = 0; pi < np; ++pi) {
      const double* row = &values[(li * np + pi) * ns];
      for (std::size_t si = 1; si < ns; ++si) {
        if (!(row[si] > row[si - 1])) {
          std::ostringstream msg;
          msg << "residual not strictly increasing in sigma2 at lambda=" << config.lambda_set[li]
              << ", p0=" << config.p0_grid[pi] << ", sigma2=" << config.sigma2_grid[si];
          throw TableBuildError(msg.str());
        }
      }
    }
  }
  return ResidualTable(config, std::move(values));
}

std::string serialize_table(const ResidualTable& table) {
  std::ostringstream os;
  os << header_json(table).dump() << '\n';
  const TableConfig& c = table.config();
  for (std::size_t li = 0; li < c.lambda_set.size(); ++li) {
    for (std::size_t pi = 0; pi < c.p0_grid.size(); ++pi) {
      ordered_json row;
      row["lambda"] = c.lambda_set[li];
      row["p0"] = c.p0_grid[pi];
      row["beta2"] = table.curve(li, pi);
      os << row.dump() << '\n';
    }
  }
  return os.str();
}

ResidualTable deserialize_table(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("residual table: empty file");
  const auto header = nlohmann::json::parse(line);
  if (header.value("format", "") != "armcs-residual-table") {
    throw std::runtime_error("residual table: not a residual table file");
  }
  if (header.at("format_version").get<int>() != ResidualTable::kFormatVersion) {
    throw std::runtime_error("residual table: unsupported format version");
  }
  TableConfig c;
  c.prior = parse_prior_kind(header.at("prior").get<std::string>());
  c.delta = header.at("delta").get<double>();
  c.lambda_set = header.at("lambda_set").get<std::vector<double>>();
  c.p0_grid = header.at("p0_grid").get<std::vector<double>>();
  c.sigma2_grid = header.at("sigma2_grid").get<std::vector<double>>();
  const auto& s = header.at("saddle");
  c.saddle.alpha_lo = s.at("alpha_lo").get<double>();
  c.saddle.alpha_hi = s.at("alpha_hi").get<double>();
  c.saddle.beta_lo = s.at("beta_lo").get<double>();
  c.saddle.beta_hi = s.at("beta_hi").get<double>();
  c.saddle.tol_search = s.at("tol_search").get<double>();
  c.saddle.max_expansions = s.at("max_expansions").get<int>();

  std::vector<double> values;
  for (std::size_t li = 0; li < c.lambda_set.size(); ++li) {
    for (std::size_t pi = 0; pi < c.p0_grid.size(); ++pi) {
      if (!std::getline(is, line)) throw std::runtime_error("residual table: truncated file");
      const auto row = nlohmann::json::parse(line);
      if (!same_value(row.at("lambda").get<double>(), c.lambda_set[li]) ||
          !same_value(row.at("p0").get<double>(), c.p0_grid[pi])) {
        throw std::runtime_error("residual table: rows out of order");
      }
      const auto curve = row.at("beta2").get<std::vector<double>>();
      if (curve.size() != c.sigma2_grid.size()) {
        throw std::runtime_error("residual table: row length mismatch");
      }
      values.insert(values.end(), curve.begin(), curve.end());
    }
  }
  ResidualTable table(std::move(c), std::move(values));
  if (table.content_hash() != header.at("hash").get<std::string>()) {
    throw std::runtime_error("residual table: content hash mismatch");
  }
  return table;
}

void save_table(const ResidualTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << serialize_table(table);
}

ResidualTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_table(buf.str());
}

double lookup_residual(const ResidualTable& table, double sigma2, double p0, double lambda) {
  const auto& grid = table.sigma2_grid();
  if (!(sigma2 >= grid.front() && sigma2 <= grid.back())) {
    throw TableRangeError("sigma2 " + std::to_string(sigma2) + " outside the tabulated range");
  }
  const std::size_t li = table.lambda_index(lambda);
  const std::size_t pi = table.nearest_p0_index(p0);
  auto hi_it = std::lower_bound(grid.begin(), grid.end(), sigma2);
  std::size_t hi = static_cast<std::size_t>(hi_it - grid.begin());
  if (grid[hi] == sigma2) return table.value(li, pi, hi);
  const std::size_t lo = hi - 1;
  const double t = (std::log(sigma2) - std::log(grid[lo])) / (std::log(grid[hi]) - std::log(grid[lo]));
  const double v_lo = std::log(table.value(li, pi, lo));
  const double v_hi = std::log(table.value(li, pi, hi));
  return std::exp(v_lo + t * (v_hi - v_lo));
}

}  // namespace armcs
