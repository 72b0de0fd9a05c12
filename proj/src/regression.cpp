#include "vrft/regression.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "vrft/error.hpp"

namespace vrft {

namespace {

constexpr std::size_t kMinDatasetLength = 10;
constexpr double kUnitGainTol = 1e-9;

std::ofstream open_for_writing(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << std::setprecision(17);
  return out;
}

double parse_field(std::string_view field, std::size_t line_no, const std::filesystem::path& path) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value)) {
    throw DataError(path.string() + ":" + std::to_string(line_no) + ": cannot parse number '" +
                    std::string(field) + "'");
  }
  return value;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    fields.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

void check_reference_model(const TransferFunction& td) {
  if (!td.is_stable()) throw ValidationError("reference model must be stable");
  if (!td.is_proper()) throw ValidationError("reference model must be proper");
  if (std::abs(dc_gain(td) - 1.0) > kUnitGainTol) throw ValidationError("reference model must satisfy T_d(1) = 1");
}

}  // namespace

Dataset::Dataset(Signal u_in, Signal y_in) : u(std::move(u_in)), y(std::move(y_in)) {
  if (u.size() != y.size()) throw ValidationError("dataset input and output lengths differ");
  if (u.size() < kMinDatasetLength) {
    throw ValidationError("dataset needs at least " + std::to_string(kMinDatasetLength) + " samples");
  }
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
  auto out = open_for_writing(path);
  out << "t,u,y\n";
  for (std::size_t t = 0; t < data.size(); ++t) out << t + 1 << ',' << data.u[t] << ',' << data.y[t] << '\n';
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");

  std::string line;
  std::size_t line_no = 0;
  int col_u = -1, col_y = -1, col_t = -1;
  std::size_t n_cols = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto header = split_commas(line);
    n_cols = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
      std::string name(header[i]);
      std::erase_if(name, [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
      if (name == "t") col_t = static_cast<int>(i);
      if (name == "u") col_u = static_cast<int>(i);
      if (name == "y") col_y = static_cast<int>(i);
    }
    break;
  }
  if (col_t < 0 || col_u < 0 || col_y < 0) {
    throw DataError(path.string() + ":" + std::to_string(line_no) + ": header must contain columns t, u, y");
  }

  std::vector<double> u, y;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_commas(line);
    if (fields.size() != n_cols) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(n_cols) +
                      " fields, found " + std::to_string(fields.size()));
    }
    parse_field(fields[static_cast<std::size_t>(col_t)], line_no, path);
    u.push_back(parse_field(fields[static_cast<std::size_t>(col_u)], line_no, path));
    y.push_back(parse_field(fields[static_cast<std::size_t>(col_y)], line_no, path));
  }
  if (u.empty()) throw DataError(path.string() + ": dataset has no data rows");
  return Dataset(Signal(std::move(u)), Signal(std::move(y)));
}

Signal virtual_reference(const TransferFunction& td, const Signal& y) {
  check_reference_model(td);
  const auto& num = td.num();
  const auto& den = td.den();
  if (num.size() == 1 && num[0] == 0.0) throw ValidationError("reference model is identically zero");

  const auto d = static_cast<std::size_t>(relative_degree(td));
  if (y.size() <= d) throw ValidationError("signal is shorter than the reference model's relative degree");
  const std::size_t n_out = y.size() - d;

  // num(q) rbar(s) = den(q) y(s + d), realized causally in s with zero initial conditions.
  std::vector<double> rbar(n_out, 0.0);
  for (std::size_t s = 0; s < n_out; ++s) {
    double acc = 0.0;
    for (std::size_t k = 0; k < den.size(); ++k) {
      if (s + d >= k) acc += den[k] * y[s + d - k];
    }
    for (std::size_t k = 1; k < num.size() && k <= s; ++k) acc -= num[k] * rbar[s - k];
    rbar[s] = acc / num[0];
  }
  return Signal(std::move(rbar));
}

RegressionProblem build_regression(const Dataset& data, const TransferFunction& td, const Dictionary& dict) {
  const Signal rbar = virtual_reference(td, data.y);
  const auto n_eff = static_cast<Eigen::Index>(rbar.size());
  const auto m = static_cast<Eigen::Index>(dict.size());

  RegressionProblem problem{Eigen::MatrixXd(n_eff, m), Eigen::VectorXd(n_eff), Eigen::VectorXd(n_eff), dict};
  std::vector<double> row(dict.size());
  double z = 0.0;
  for (Eigen::Index t = 0; t < n_eff; ++t) {
    if (!std::isfinite(z)) {
      throw DataError("integrator state is not finite at sample " + std::to_string(t + 1));
    }
    problem.zbar[t] = z;
    problem.target[t] = data.u[static_cast<std::size_t>(t)];
    dict.evaluate(z, row);
    for (Eigen::Index j = 0; j < m; ++j) {
      const double v = row[static_cast<std::size_t>(j)];
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "regressor " << j + 1 << " is not finite at sample " << t + 1 << " (zbar = " << z
            << "); the dictionary scale is too small for this data";
        throw DataError(msg.str());
      }
      problem.phi(t, j) = v;
    }
    z += rbar[static_cast<std::size_t>(t)] - data.y[static_cast<std::size_t>(t)];
  }
  return problem;
}

double vrft_cost(const RegressionProblem& problem, const Eigen::VectorXd& rho) {
  if (rho.size() != problem.cols()) {
    throw ValidationError("parameter vector length " + std::to_string(rho.size()) + " does not match " +
                          std::to_string(problem.cols()) + " regressors");
  }
  return (problem.target - problem.phi * rho).squaredNorm();
}

void write_regression_csv(const std::filesystem::path& path, const RegressionProblem& problem) {
  auto out = open_for_writing(path);
  out << "t,zbar,target";
  for (Eigen::Index j = 0; j < problem.cols(); ++j) out << ",phi_" << j + 1;
  out << '\n';
  for (Eigen::Index t = 0; t < problem.rows(); ++t) {
    out << t + 1 << ',' << problem.zbar[t] << ',' << problem.target[t];
    for (Eigen::Index j = 0; j < problem.cols(); ++j) out << ',' << problem.phi(t, j);
    out << '\n';
  }
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

}  // namespace vrft
