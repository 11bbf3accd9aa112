#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "quadenv/penalty.hpp"

namespace quadenv {

/// Sparse-recovery comparison: l1 (best over a lambda sweep) against FBS on
/// Q_gamma(card) and Q_gamma(iota_K) with gamma = gamma_factor * |A|^2.
struct ExperimentConfig {
  int m = 100;
  int n = 200;
  int true_card = 10;
  std::vector<double> noise_levels = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0};
  int trials_per_level = 20;
  std::uint64_t seed = 20170101;
  std::vector<std::string> methods = {"l1_sweep", "q_card", "q_topk"};
  std::vector<double> lambda_sweep = {8.0, 5.0, 3.0, 2.0, 1.5, 1.0, 0.75, 0.5, 0.35, 0.25, 0.15,
                                      0.1, 0.05, 0.02, 0.01, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
  /// Weight of card in Q_gamma(mu card).
  double card_mu = 1.0;
  double gamma_factor = 1.01;
  /// FBS runs per Q method (zero start, l1 warm start, Gaussian starts).
  int restarts = 10;
  /// |A x0|; |eps| = 4 is then about 30% of |d|.
  double signal_norm = 12.72;
  /// Nonzeros of x0 before rescaling: "random_sign" (+-1) or "gaussian" (N(0,1)).
  std::string coefficients = "random_sign";
  /// Entries with |x_i| <= support_tol count as zero when comparing supports.
  double support_tol = 1e-6;
  /// The lambda sweep stops after the distance to the oracle has risen for
  /// this many consecutive lambdas (0: never).
  int sweep_patience = 3;
  /// Mix random-support least-squares starts into the Q restarts.
  bool support_starts = false;

  void validate() const;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);

struct ExperimentRow {
  std::string method;
  double noise_level = 0.0;
  int trial = 0;
  double dist_to_oracle = 0.0;
  bool support_match = false;
  double objective = 0.0;
  /// Seconds; kept out of the deterministic table.
  double wall_time = 0.0;
  /// Selected lambda for l1_sweep, gamma for the Q methods.
  double parameter = 0.0;
};

/// Rows sorted by (method, noise level, trial).
std::vector<ExperimentRow> run_fig4(const ExperimentConfig& cfg, std::size_t threads = 1);

/// Deterministic CSV: '#' metadata lines, then the header
/// method,noise_level,trial,dist_to_oracle,support_match,objective,parameter.
std::string fig4_csv(const ExperimentConfig& cfg, const std::vector<ExperimentRow>& rows);
/// method,noise_level,trial,wall_time
std::string fig4_timing_csv(const std::vector<ExperimentRow>& rows);

struct MethodSummary {
  std::string method;
  double noise_level;
  int trials;
  double mean_dist;
  double support_match_rate;
  /// Fraction of trials with support match and dist < 1e-6.
  double exact_rate;
};

std::vector<MethodSummary> summarize(const std::vector<ExperimentRow>& rows);

}  // namespace quadenv
