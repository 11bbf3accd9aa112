#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "quadenv/solver.hpp"

namespace quadenv {

/// 17 significant digits; round-trips every double.
std::string format_double(double value);

// Matrices: one row per line, comma separated, no header.
// Vectors: one value per line.
Matrix read_matrix_csv(const std::filesystem::path& path);
Vector read_vector_csv(const std::filesystem::path& path);
Matrix parse_matrix_csv(const std::string& text);
std::string matrix_csv(const Matrix& M);
std::string vector_csv(const Vector& v);
void write_text(const std::filesystem::path& path, const std::string& text);

/**
 * Problem file:
 *   {"A": "A.csv", "d": "d.csv", "penalty": {...},
 *    "gamma": {"mode": "auto_c", "c": 1.01} | {"mode": "fixed", "value": g},
 *    "solver": {"mode": "auto|exact|hull", "step": t, "tol": ..., "max_iterations": ...,
 *               "patience": ..., "restarts": r, "seed": s, "x0": "x0.csv"}}
 * CSV paths are taken relative to the working directory.
 */
struct ProblemFile {
  Problem problem;
  SolverOptions options;
  int restarts = 1;
  std::optional<Vector> x0;
  nlohmann::json gamma_spec;
};

ProblemFile load_problem_file(const std::filesystem::path& path);

nlohmann::json result_json(const ProblemFile& file, const SolveResult& result, const Regime& regime);
std::string trace_csv(const SolveResult& result);

}  // namespace quadenv
