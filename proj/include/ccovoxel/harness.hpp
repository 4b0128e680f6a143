#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ccovoxel/backend.hpp"
#include "ccovoxel/embedding.hpp"
#include "ccovoxel/frontend.hpp"
#include "ccovoxel/scenario.hpp"
#include "ccovoxel/world.hpp"

namespace ccv {

enum class Baseline { Proposed, Deterministic, BoundingVolume };

const char* to_string(Baseline b);
Baseline parse_baseline(const std::string& s);

inline constexpr Baseline kAllBaselines[] = {Baseline::Proposed, Baseline::Deterministic, Baseline::BoundingVolume};

/// Seed of a trial; every per-trial stream is derived from it.
std::uint64_t trial_seed(std::uint64_t master, int trial);

/// Ground truth and its sensed counterpart for one trial.
struct TrialWorld {
  VoxelGrid truth;
  DistanceField truth_field;
  VoxelGrid measured;
  DistanceField measured_field;
};

TrialWorld build_trial_world(const Scenario& s, int trial);

/// Effective planner settings of a baseline.
struct PlannerSetup {
  SearchConfig frontend;
  CemConfig backend;
};

PlannerSetup configure(const Scenario& s, Baseline b, std::uint64_t seed);

struct PlanOptions {
  bool frontend_only = false;
  ExpansionSink expansion_sink;
};

struct PlanOutcome {
  bool planned = false;
  std::string failure;
  std::optional<SearchResult> search;
  std::optional<TrajectoryCoefficients> initial;
  std::optional<CemResult> cem;
  double frontend_seconds = 0.0;
  double backend_seconds = 0.0;
};

/// Plans on the measured field only; the ground truth is not an input.
/// Planner errors are captured in the outcome instead of thrown.
PlanOutcome plan(const Scenario& s, Baseline b, const DistanceField& measured, std::uint64_t seed,
                 const PlanOptions& options = {});

struct RunResult {
  int trial = 0;
  Baseline baseline = Baseline::Proposed;
  bool planned = false;
  bool goal_reached = false;
  bool collision = false;
  bool success = false;
  double smoothness = 0.0;
  double path_length = 0.0;
  double min_clearance = 0.0;
  double duration = 0.0;
  double final_mmd = 0.0;
  std::size_t expansions = 0;
  double frontend_seconds = 0.0;
  double backend_seconds = 0.0;
  std::string failure;
};

/// Positions along the planned motion every dt (backend trajectory, or the
/// frontend path in frontend-only mode).
std::vector<Eigen::Vector3d> executed_positions(const PlanOutcome& o, bool frontend_only, double dt);

/// Scores an outcome against the ground-truth field.
RunResult score(const Scenario& s, const PlanOutcome& o, const DistanceField& truth, bool frontend_only);

RunResult run_trial(const Scenario& s, Baseline b, int trial, bool frontend_only = false);

struct BaselineSummary {
  Baseline baseline = Baseline::Proposed;
  int trials = 0;
  int planned = 0;
  int successes = 0;
  int collisions = 0;
  double success_rate = 0.0;
  double collision_rate = 0.0;
  /// Over successful runs; 0 when there are none.
  double mean_smoothness = 0.0;
  double mean_path_length = 0.0;
  double mean_min_clearance = 0.0;
  double mean_seconds = 0.0;
  double std_seconds = 0.0;
};

struct BenchmarkReport {
  std::vector<RunResult> runs;
  std::vector<BaselineSummary> summary;
};

/// Aggregates per-trial rows; the table is a pure function of its input.
std::vector<BaselineSummary> summarize(const std::vector<RunResult>& runs, const std::vector<Baseline>& baselines);

BenchmarkReport run_benchmark(const Scenario& s, const std::vector<Baseline>& baselines, int workers,
                              bool frontend_only = false);

/// Writes <prefix>.csv (aggregate), <prefix>_trials.csv, <prefix>_trials.jsonl
/// and <prefix>_timing.csv into dir. Only the timing file depends on wall clock.
void write_report(const BenchmarkReport& r, const std::string& dir, const std::string& prefix);
void print_table(const BenchmarkReport& r, std::ostream& os);

/// Violation vectors from random worlds and points, stratified into safe,
/// marginal and colliding thirds; each row sorted in descending order.
Eigen::MatrixXd synthesize_violation_vectors(const Scenario& s, int count, std::uint64_t seed);

struct MmdAblation {
  int vectors = 0;
  int samples = 0;
  int latent_dim = 0;
  double full_median_seconds = 0.0;
  double latent_median_seconds = 0.0;
  double speedup = 0.0;
  double rank_correlation = 0.0;
  double identity_max_error = 0.0;
  std::vector<double> full;
  std::vector<double> latent;
};

/// Times matrix-form MMD on the full samples against the latent path through
/// `encoder`, and checks their rank agreement over the same vectors.
MmdAblation ablate_mmd(const Eigen::MatrixXd& vectors, const Autoencoder& encoder, int repeats = 5);
void write_mmd_ablation(const MmdAblation& a, const std::string& dir);

/// Ablation on vectors drawn from the scenario. Without an encoder one is
/// trained on a separate draw of the same size.
MmdAblation run_mmd_ablation(const Scenario& s, const Autoencoder* encoder, int vectors, int latent_dim,
                             const TrainConfig& cfg = {});

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

struct EncoderTraining {
  TrainResult result;
  Eigen::MatrixXd data;
};

EncoderTraining train_encoder(const Scenario& s, int vectors, int latent_dim, const TrainConfig& cfg);

/// Everything `plan` writes for a single scenario run.
struct PlanArtifacts {
  PlanOutcome outcome;
  RunResult score;
  std::vector<ExpansionRecord> expansions;
};

PlanArtifacts plan_scenario(const Scenario& s, Baseline b, int trial = 0);
void write_plan_artifacts(const PlanArtifacts& a, const Scenario& s, const std::string& dir);

}  // namespace ccv
