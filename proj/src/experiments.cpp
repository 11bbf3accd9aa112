#include "quadenv/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "quadenv/io.hpp"
#include "quadenv/parallel.hpp"
#include "quadenv/penalties.hpp"
#include "quadenv/solver.hpp"

namespace quadenv {

void ExperimentConfig::validate() const {
  if (m < 1 || n < 1) throw InputError("m and n must be positive");
  if (true_card < 0 || true_card > n) throw InputError("true_card must lie in [0, n]");
  if (trials_per_level < 0) throw InputError("trials_per_level must be non-negative");
  for (double level : noise_levels) {
    if (!(level >= 0.0)) throw InputError("noise levels must be non-negative");
  }
  for (const auto& method : methods) {
    if (method != "l1_sweep" && method != "q_card" && method != "q_topk") {
      throw InputError("unknown method: " + method);
    }
  }
  for (double lambda : lambda_sweep) {
    if (!(lambda > 0.0)) throw InputError("lambda_sweep values must be positive");
  }
  if (std::find(methods.begin(), methods.end(), "l1_sweep") != methods.end() && lambda_sweep.empty()) {
    throw InputError("l1_sweep needs a non-empty lambda_sweep");
  }
  if (!(card_mu > 0.0)) throw InputError("card_mu must be positive");
  if (!(gamma_factor > 1.0)) throw InputError("gamma_factor must exceed 1 (strict |A|^2 < gamma)");
  if (restarts < 1) throw InputError("restarts must be at least 1");
  if (!(signal_norm > 0.0)) throw InputError("signal_norm must be positive");
  if (!(support_tol >= 0.0)) throw InputError("support_tol must be non-negative");
  if (sweep_patience < 0) throw InputError("sweep_patience must be non-negative");
  if (coefficients != "random_sign" && coefficients != "gaussian") {
    throw InputError("coefficients must be \"random_sign\" or \"gaussian\"");
  }
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  try {
    cfg.m = j.value("m", cfg.m);
    cfg.n = j.value("n", cfg.n);
    cfg.true_card = j.value("true_card", cfg.true_card);
    cfg.noise_levels = j.value("noise_levels", cfg.noise_levels);
    cfg.trials_per_level = j.value("trials_per_level", cfg.trials_per_level);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.methods = j.value("methods", cfg.methods);
    cfg.lambda_sweep = j.value("lambda_sweep", cfg.lambda_sweep);
    cfg.card_mu = j.value("card_mu", cfg.card_mu);
    cfg.gamma_factor = j.value("gamma_factor", cfg.gamma_factor);
    cfg.restarts = j.value("restarts", cfg.restarts);
    cfg.signal_norm = j.value("signal_norm", cfg.signal_norm);
    cfg.coefficients = j.value("coefficients", cfg.coefficients);
    cfg.support_tol = j.value("support_tol", cfg.support_tol);
    cfg.sweep_patience = j.value("sweep_patience", cfg.sweep_patience);
    cfg.support_starts = j.value("support_starts", cfg.support_starts);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad experiment config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  return {{"m", cfg.m},
          {"n", cfg.n},
          {"true_card", cfg.true_card},
          {"noise_levels", cfg.noise_levels},
          {"trials_per_level", cfg.trials_per_level},
          {"seed", cfg.seed},
          {"methods", cfg.methods},
          {"lambda_sweep", cfg.lambda_sweep},
          {"card_mu", cfg.card_mu},
          {"gamma_factor", cfg.gamma_factor},
          {"restarts", cfg.restarts},
          {"signal_norm", cfg.signal_norm},
          {"coefficients", cfg.coefficients},
          {"support_tol", cfg.support_tol},
          {"sweep_patience", cfg.sweep_patience},
          {"support_starts", cfg.support_starts}};
}

namespace {

struct TrialData {
  Matrix A;
  Vector x0;
  std::vector<int> support;
  Vector noise_direction;  // unit norm
  double opnorm_sq;
};

// One draw per trial index, shared by every noise level so that levels differ
// only in the noise norm.
TrialData draw_trial(const ExperimentConfig& cfg, int trial) {
  std::mt19937_64 rng(cfg.seed + static_cast<std::uint64_t>(trial));
  std::normal_distribution<double> normal;

  TrialData t;
  t.A.resize(cfg.m, cfg.n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.m));
  for (auto& a : t.A.reshaped()) a = normal(rng) * scale;

  std::vector<int> indices(static_cast<std::size_t>(cfg.n));
  std::iota(indices.begin(), indices.end(), 0);
  for (int i = 0; i < cfg.true_card; ++i) {
    std::uniform_int_distribution<int> pick(i, cfg.n - 1);
    std::swap(indices[static_cast<std::size_t>(i)], indices[static_cast<std::size_t>(pick(rng))]);
  }
  t.support.assign(indices.begin(), indices.begin() + cfg.true_card);
  std::sort(t.support.begin(), t.support.end());

  t.x0 = Vector::Zero(cfg.n);
  const bool gaussian = cfg.coefficients == "gaussian";
  for (int i : t.support) {
    const double draw = normal(rng);
    t.x0[i] = gaussian ? draw : (draw < 0.0 ? -1.0 : 1.0);
  }
  const double signal = (t.A * t.x0).norm();
  if (signal > 0.0) t.x0 *= cfg.signal_norm / signal;

  t.noise_direction.resize(cfg.m);
  for (auto& e : t.noise_direction) e = normal(rng);
  t.noise_direction.normalize();

  t.opnorm_sq = power_iteration(t.A, 1000, cfg.seed + static_cast<std::uint64_t>(trial));
  return t;
}

struct Job {
  std::string method;
  std::size_t level;
  int trial;
};

ExperimentRow run_job(const ExperimentConfig& cfg, const TrialData& t, const Job& job) {
  const auto start = std::chrono::steady_clock::now();
  const double noise = cfg.noise_levels[job.level];
  const Vector d = t.A * t.x0 + noise * t.noise_direction;
  const Vector oracle = oracle_solution(t.A, d, t.support);

  ExperimentRow row;
  row.method = job.method;
  row.noise_level = noise;
  row.trial = job.trial;

  SolverOptions opts;
  opts.opnorm_sq = t.opnorm_sq;
  opts.seed = cfg.seed + 7919u * static_cast<std::uint64_t>(job.trial) + job.level;

  Vector estimate;
  if (job.method == "l1_sweep") {
    std::vector<double> lambdas = cfg.lambda_sweep;
    std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
    Vector warm = Vector::Zero(cfg.n);
    double best_dist = kInf;
    double last_dist = kInf;
    int rising = 0;
    for (double lambda : lambdas) {
      Problem p{t.A, d, std::make_shared<L1Penalty>(lambda), Gamma(t.opnorm_sq)};
      auto result = ista_solve(p, warm, opts);
      warm = result.x;
      const double dist = (result.x - oracle).norm();
      if (dist < best_dist) {
        best_dist = dist;
        estimate = result.x;
        row.objective = result.objective;
        row.parameter = lambda;
      }
      rising = dist > last_dist ? rising + 1 : 0;
      last_dist = dist;
      if (cfg.sweep_patience > 0 && rising >= cfg.sweep_patience) break;
    }
  } else {
    PenaltyPtr penalty;
    if (job.method == "q_card") {
      penalty = std::make_shared<CardPenalty>(cfg.card_mu);
    } else {
      penalty = std::make_shared<TopKIndicator>(cfg.true_card);
    }
    const Gamma gamma(cfg.gamma_factor * t.opnorm_sq);
    Problem p{t.A, d, penalty, gamma};
    MultiStartOptions ms;
    ms.restarts = cfg.restarts;
    ms.support_starts = cfg.support_starts;
    auto best = fbs_multistart(p, opts, ms).best;
    estimate = best.x;
    row.objective = best.envelope_objective;
    row.parameter = gamma.value();
  }

  row.dist_to_oracle = (estimate - oracle).norm();
  row.support_match = support_of(estimate, cfg.support_tol) == t.support;
  row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

}  // namespace

std::vector<ExperimentRow> run_fig4(const ExperimentConfig& cfg, std::size_t threads) {
  cfg.validate();
  std::vector<TrialData> trials;
  for (int trial = 0; trial < cfg.trials_per_level; ++trial) trials.push_back(draw_trial(cfg, trial));

  std::vector<Job> jobs;
  for (const auto& method : cfg.methods) {
    for (std::size_t level = 0; level < cfg.noise_levels.size(); ++level) {
      for (int trial = 0; trial < cfg.trials_per_level; ++trial) jobs.push_back({method, level, trial});
    }
  }

  std::vector<ExperimentRow> rows(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    rows[i] = run_job(cfg, trials[static_cast<std::size_t>(jobs[i].trial)], jobs[i]);
  });

  std::stable_sort(rows.begin(), rows.end(), [](const ExperimentRow& a, const ExperimentRow& b) {
    return std::tie(a.method, a.noise_level, a.trial) < std::tie(b.method, b.noise_level, b.trial);
  });
  return rows;
}

std::string fig4_csv(const ExperimentConfig& cfg, const std::vector<ExperimentRow>& rows) {
  std::ostringstream out;
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  out << "# generated_at: " << stamp << "\n";
  out << "# config: " << to_json(cfg).dump() << "\n";
  out << "# data: A iid N(0, 1/m); support uniform without replacement; x0 nonzeros per 'coefficients' (random_sign: +-1, gaussian: N(0,1)) rescaled to "
         "|A x0| = signal_norm; eps = noise_level * (uniform direction on the sphere); d = A x0 + eps\n";
  out << "# q methods: gamma = gamma_factor * |A|^2 (power iteration), hull-prox FBS, best J_gamma over restarts\n";
  out << "# l1_sweep: FISTA with warm starts along lambda_sweep (descending), best entry by distance to oracle; sweep stops after sweep_patience consecutive rises; support counts |x_i| > support_tol\n";
  out << "method,noise_level,trial,dist_to_oracle,support_match,objective,parameter\n";
  for (const auto& row : rows) {
    out << row.method << ',' << format_double(row.noise_level) << ',' << row.trial << ','
        << format_double(row.dist_to_oracle) << ',' << (row.support_match ? 1 : 0) << ','
        << format_double(row.objective) << ',' << format_double(row.parameter) << '\n';
  }
  return out.str();
}

std::string fig4_timing_csv(const std::vector<ExperimentRow>& rows) {
  std::ostringstream out;
  out << "method,noise_level,trial,wall_time\n";
  for (const auto& row : rows) {
    out << row.method << ',' << format_double(row.noise_level) << ',' << row.trial << ','
        << format_double(row.wall_time) << '\n';
  }
  return out.str();
}

std::vector<MethodSummary> summarize(const std::vector<ExperimentRow>& rows) {
  std::map<std::pair<std::string, double>, std::vector<const ExperimentRow*>> groups;
  for (const auto& row : rows) groups[{row.method, row.noise_level}].push_back(&row);

  std::vector<MethodSummary> out;
  for (const auto& [key, members] : groups) {
    MethodSummary s{key.first, key.second, static_cast<int>(members.size()), 0.0, 0.0, 0.0};
    for (const auto* row : members) {
      s.mean_dist += row->dist_to_oracle;
      s.support_match_rate += row->support_match ? 1.0 : 0.0;
      s.exact_rate += (row->support_match && row->dist_to_oracle < 1e-6) ? 1.0 : 0.0;
    }
    const double count = static_cast<double>(members.size());
    s.mean_dist /= count;
    s.support_match_rate /= count;
    s.exact_rate /= count;
    out.push_back(s);
  }
  return out;
}

}  // namespace quadenv
