#include "quadenv/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "quadenv/penalties.hpp"

namespace quadenv {

std::string format_double(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::ostringstream out;
  out << std::setprecision(17) << value;
  return out.str();
}

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

double parse_double(const std::string& token) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &used);
  } catch (const std::exception&) {
    throw InputError("not a number: '" + token + "'");
  }
  while (used < token.size() && std::isspace(static_cast<unsigned char>(token[used]))) ++used;
  if (used != token.size()) throw InputError("not a number: '" + token + "'");
  return value;
}

}  // namespace

Matrix parse_matrix_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(parse_double(cell));
    if (!rows.empty() && row.size() != rows.front().size()) throw InputError("ragged CSV matrix");
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().empty()) throw InputError("empty CSV matrix");
  Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) M(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return M;
}

Matrix read_matrix_csv(const std::filesystem::path& path) { return parse_matrix_csv(read_text(path)); }

Vector read_vector_csv(const std::filesystem::path& path) {
  const Matrix M = parse_matrix_csv(read_text(path));
  if (M.cols() == 1) return M.col(0);
  if (M.rows() == 1) return M.row(0).transpose();
  throw InputError(path.string() + " is not a vector");
}

std::string matrix_csv(const Matrix& M) {
  std::ostringstream out;
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) out << (j ? "," : "") << format_double(M(i, j));
    out << '\n';
  }
  return out.str();
}

std::string vector_csv(const Vector& v) {
  std::ostringstream out;
  for (double x : v) out << format_double(x) << '\n';
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

ProblemFile load_problem_file(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("invalid JSON in " + path.string() + ": " + e.what());
  }

  ProblemFile file;
  try {
    Problem& p = file.problem;
    p.A = read_matrix_csv(j.at("A").get<std::string>());
    p.d = read_vector_csv(j.at("d").get<std::string>());
    p.penalty = make_penalty(j.at("penalty"));

    const auto solver = j.value("solver", nlohmann::json::object());
    auto& o = file.options;
    o.mode = prox_mode_from_string(solver.value("mode", std::string("auto")));
    o.step = solver.value("step", 0.0);
    o.tol = solver.value("tol", o.tol);
    o.step_tol = solver.value("step_tol", o.step_tol);
    o.patience = solver.value("patience", o.patience);
    o.max_iterations = solver.value("max_iterations", o.max_iterations);
    o.power_iterations = solver.value("power_iterations", o.power_iterations);
    o.seed = solver.value("seed", o.seed);
    file.restarts = solver.value("restarts", 1);
    if (solver.contains("x0")) file.x0 = read_vector_csv(solver.at("x0").get<std::string>());
    p.validate();

    file.gamma_spec = j.value("gamma", nlohmann::json{{"mode", "auto_c"}, {"c", 1.01}});
    const auto mode = file.gamma_spec.value("mode", std::string("auto_c"));
    if (mode == "fixed") {
      p.gamma = Gamma(file.gamma_spec.at("value").get<double>());
    } else if (mode == "auto_c") {
      const double opnorm = power_iteration(p.A, o.power_iterations, o.seed);
      o.opnorm_sq = opnorm;
      p.gamma = Gamma(file.gamma_spec.value("c", 1.01) * opnorm);
    } else {
      throw InputError("unknown gamma mode: " + mode);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError("bad problem file " + path.string() + ": " + e.what());
  }
  return file;
}

nlohmann::json result_json(const ProblemFile& file, const SolveResult& result, const Regime& regime) {
  std::vector<double> x(result.x.data(), result.x.data() + result.x.size());
  return {{"x", x},
          {"objective", result.objective},
          {"envelope_objective", result.envelope_objective},
          {"iterations", result.iterations},
          {"converged", result.converged},
          {"contact", result.contact},
          {"step", result.step},
          {"mode", to_string(result.mode)},
          {"seed", result.seed},
          {"gamma", file.problem.gamma.value()},
          {"gamma_spec", file.gamma_spec},
          {"penalty", file.problem.penalty->descriptor()},
          {"regime", {{"label", to_string(regime.label)}, {"opnorm_sq", regime.opnorm_sq}, {"minsv_sq", regime.minsv_sq}}},
          {"restarts", file.restarts}};
}

std::string trace_csv(const SolveResult& result) {
  std::ostringstream out;
  out << "iteration,envelope_objective\n";
  for (std::size_t i = 0; i < result.objective_trace.size(); ++i) {
    out << i << ',' << format_double(result.objective_trace[i]) << '\n';
  }
  return out.str();
}

}  // namespace quadenv
