#include "ccovoxel/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include <json.hpp>

#include "ccovoxel/error.hpp"
#include "ccovoxel/log.hpp"
#include "ccovoxel/rng.hpp"
#include "ccovoxel/trajectory.hpp"
#include "ccovoxel/uncertainty.hpp"

namespace ccv {

namespace {

// Shortest round-trip decimal form, so files reparse to identical doubles.
std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) fail(ErrorCode::Io, "cannot open " + p.string() + " for writing");
  return os;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

constexpr std::uint64_t kTagWorld = 0x776f726c64ULL;
constexpr std::uint64_t kTagMap = 0x6d6170ULL;
constexpr std::uint64_t kTagPlan = 0x706c616eULL;
constexpr std::uint64_t kTagTrain = 0x747261696eULL;
constexpr double kScoreDt = 0.02;

TrajectoryCoefficients fit_path(const SearchResult& r, const Scenario& s) {
  const double total = r.duration();
  if (!(total > 0.0)) fail(ErrorCode::DegenerateFit, "frontend path has zero duration");
  const double dt = s.planner.fit.waypoint_dt;
  std::vector<double> times;
  for (double t = 0.0; t < total; t += dt) times.push_back(t);
  times.push_back(total);
  // At least as many waypoints as coefficients keeps the normal equations regular.
  const auto need = static_cast<std::size_t>(s.planner.fit.degree + 1);
  if (times.size() < need) {
    times.clear();
    for (std::size_t i = 0; i < need; ++i) times.push_back(total * static_cast<double>(i) / static_cast<double>(need - 1));
  }
  Eigen::MatrixX3d wp(static_cast<Eigen::Index>(times.size()), 3);
  for (std::size_t i = 0; i < times.size(); ++i) wp.row(static_cast<Eigen::Index>(i)) = r.position(times[i]).transpose();
  BoundaryConditions bc;
  bc.start_position = r.nodes.front().state.position;
  bc.start_velocity = r.nodes.front().state.velocity;
  bc.end_position = s.goal;
  return fit_polynomial(wp, times, bc, s.planner.fit.degree, total);
}

}  // namespace

const char* to_string(Baseline b) {
  switch (b) {
    case Baseline::Proposed: return "proposed";
    case Baseline::Deterministic: return "deterministic";
    case Baseline::BoundingVolume: return "bounding_volume";
  }
  return "unknown";
}

Baseline parse_baseline(const std::string& s) {
  for (Baseline b : kAllBaselines)
    if (s == to_string(b)) return b;
  fail(ErrorCode::InvalidArgument, "unknown baseline '" + s + "'");
}

std::uint64_t trial_seed(std::uint64_t master, int trial) {
  return derive_seed({master, 0x747269616cULL, static_cast<std::uint64_t>(trial)});
}

TrialWorld build_trial_world(const Scenario& s, int trial) {
  const std::uint64_t ts = trial_seed(s.seed, trial);
  WorldSpec spec = s.world;
  spec.seed = derive_seed({ts, kTagWorld});
  spec.keep_free = {s.start, s.goal};
  VoxelGrid truth = generate_world(spec);
  DistanceField truth_field = compute_edt(truth, s.distance_clamp);
  VoxelGrid measured = corrupt_grid(truth, s.map_noise_sigma, derive_seed({ts, kTagMap}));
  DistanceField measured_field = compute_edt(measured, s.distance_clamp);
  return {std::move(truth), std::move(truth_field), std::move(measured), std::move(measured_field)};
}

PlannerSetup configure(const Scenario& s, Baseline b, std::uint64_t seed) {
  PlannerSetup p{s.planner.frontend, s.planner.backend};
  p.frontend.seed = derive_seed({seed, 1});
  p.backend.seed = derive_seed({seed, 2});
  p.frontend.bandwidth = s.planner.bandwidth;
  p.backend.bandwidth = s.planner.bandwidth;
  if (b != Baseline::Proposed) {
    double threshold = s.r_safe;
    if (b == Baseline::BoundingVolume) threshold += s.planner.bounding_volume_k * s.noise.stddev();
    p.frontend.w_mmd = 0.0;
    p.backend.w_mmd = 0.0;
    p.frontend.hard_clearance = threshold;
    p.backend.hard_clearance = threshold;
  }
  return p;
}

PlanOutcome plan(const Scenario& s, Baseline b, const DistanceField& measured, std::uint64_t seed,
                 const PlanOptions& options) {
  PlanOutcome out;
  const PlannerSetup setup = configure(s, b, seed);
  ViolationModel model(measured, s.noise, s.r_safe, s.planner.samples_per_point);
  if (!s.planner.encoder_path.empty()) {
    std::filesystem::path p(s.planner.encoder_path);
    if (p.is_relative()) p = std::filesystem::path(s.base_dir) / p;
    auto enc = std::make_shared<const Autoencoder>(Autoencoder::load(p.string()));
    model = model.with_embedding({enc, KernelSpec::rbf(s.planner.latent_bandwidth), LatentMode::CoordinatesAsSamples});
  }

  KinoState start;
  start.position = s.start;
  auto t0 = std::chrono::steady_clock::now();
  try {
    out.search = search(start, s.goal, model, setup.frontend, options.expansion_sink);
  } catch (const Error& e) {
    out.frontend_seconds = seconds_since(t0);
    out.failure = std::string(to_string(e.code())) + ": " + e.what();
    return out;
  }
  out.frontend_seconds = seconds_since(t0);
  if (options.frontend_only) {
    out.planned = true;
    return out;
  }

  t0 = std::chrono::steady_clock::now();
  try {
    out.initial = fit_path(*out.search, s);
    BoundaryConditions bc;
    bc.start_position = s.start;
    bc.start_velocity = out.search->nodes.front().state.velocity;
    bc.end_position = s.goal;
    out.cem = cem_refine(*out.initial, bc, model, setup.backend);
    out.planned = true;
  } catch (const Error& e) {
    out.failure = std::string(to_string(e.code())) + ": " + e.what();
  }
  out.backend_seconds = seconds_since(t0);
  return out;
}

std::vector<Eigen::Vector3d> executed_positions(const PlanOutcome& o, bool frontend_only, double dt) {
  std::vector<Eigen::Vector3d> pts;
  if (frontend_only) {
    if (o.search) pts = o.search->sample_positions(dt);
    return pts;
  }
  if (!o.cem) return pts;
  const auto& c = o.cem->coefficients;
  const int steps = std::max(1, static_cast<int>(std::ceil(c.duration / dt)));
  for (int k = 0; k <= steps; ++k) pts.push_back(evaluate(c, std::min(c.duration, k * dt)).position);
  return pts;
}

RunResult score(const Scenario& s, const PlanOutcome& o, const DistanceField& truth, bool frontend_only) {
  RunResult r;
  r.planned = o.planned;
  r.failure = o.failure;
  r.frontend_seconds = o.frontend_seconds;
  r.backend_seconds = o.backend_seconds;
  if (o.search) r.expansions = o.search->expansions;
  if (!o.planned) return r;

  const auto pts = executed_positions(o, frontend_only, kScoreDt);
  double clearance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i > 0) r.path_length += (pts[i] - pts[i - 1]).norm();
    const double d = truth.inside(pts[i]) ? truth.query(pts[i]) : 0.0;
    clearance = std::min(clearance, d);
  }
  r.min_clearance = std::max(0.0, clearance);
  r.collision = clearance < s.robot_radius;
  const double tol = s.planner.frontend.goal_tolerance;
  r.goal_reached = !pts.empty() && (pts.back() - s.goal).norm() <= tol;
  r.success = r.goal_reached && !r.collision;
  if (frontend_only) {
    r.duration = o.search->duration();
  } else {
    r.duration = o.cem->coefficients.duration;
    r.smoothness = smoothness_cost(o.cem->coefficients);
    r.final_mmd = o.cem->trace.back().mean_cost.mmd;
  }
  return r;
}

RunResult run_trial(const Scenario& s, Baseline b, int trial, bool frontend_only) {
  const TrialWorld w = build_trial_world(s, trial);
  PlanOptions opts;
  opts.frontend_only = frontend_only;
  const PlanOutcome o = plan(s, b, w.measured_field, derive_seed({trial_seed(s.seed, trial), kTagPlan}), opts);
  RunResult r = score(s, o, w.truth_field, frontend_only);
  r.trial = trial;
  r.baseline = b;
  return r;
}

std::vector<BaselineSummary> summarize(const std::vector<RunResult>& runs, const std::vector<Baseline>& baselines) {
  std::vector<BaselineSummary> out;
  for (Baseline b : baselines) {
    BaselineSummary sm;
    sm.baseline = b;
    double smooth = 0.0, length = 0.0, clearance = 0.0, time = 0.0;
    std::vector<double> times;
    for (const auto& r : runs) {
      if (r.baseline != b) continue;
      ++sm.trials;
      sm.planned += r.planned ? 1 : 0;
      sm.collisions += r.collision ? 1 : 0;
      const double t = r.frontend_seconds + r.backend_seconds;
      times.push_back(t);
      time += t;
      if (r.success) {
        ++sm.successes;
        smooth += r.smoothness;
        length += r.path_length;
        clearance += r.min_clearance;
      }
    }
    if (sm.trials > 0) {
      sm.success_rate = 100.0 * sm.successes / sm.trials;
      sm.collision_rate = 100.0 * sm.collisions / sm.trials;
      sm.mean_seconds = time / sm.trials;
      double var = 0.0;
      for (double t : times) var += (t - sm.mean_seconds) * (t - sm.mean_seconds);
      sm.std_seconds = std::sqrt(var / sm.trials);
    }
    if (sm.successes > 0) {
      sm.mean_smoothness = smooth / sm.successes;
      sm.mean_path_length = length / sm.successes;
      sm.mean_min_clearance = clearance / sm.successes;
    }
    out.push_back(sm);
  }
  return out;
}

BenchmarkReport run_benchmark(const Scenario& s, const std::vector<Baseline>& baselines, int workers,
                              bool frontend_only) {
  if (baselines.empty()) fail(ErrorCode::InvalidArgument, "no baselines selected");
  const std::size_t nb = baselines.size();
  const std::size_t total = static_cast<std::size_t>(s.trials) * nb;
  BenchmarkReport rep;
  rep.runs.resize(total);

  // One job per trial so the world is built once and shared by the baselines.
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int t = next++; t < s.trials; t = next++) {
      try {
        const TrialWorld w = build_trial_world(s, t);
        const std::uint64_t seed = derive_seed({trial_seed(s.seed, t), kTagPlan});
        for (std::size_t bi = 0; bi < nb; ++bi) {
          PlanOptions opts;
          opts.frontend_only = frontend_only;
          const PlanOutcome o = plan(s, baselines[bi], w.measured_field, seed, opts);
          RunResult r = score(s, o, w.truth_field, frontend_only);
          r.trial = t;
          r.baseline = baselines[bi];
          rep.runs[static_cast<std::size_t>(t) * nb + bi] = std::move(r);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int n = std::clamp(workers, 1, s.trials);
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  rep.summary = summarize(rep.runs, baselines);
  return rep;
}

void write_report(const BenchmarkReport& r, const std::string& dir, const std::string& prefix) {
  const std::filesystem::path d(dir);
  std::filesystem::create_directories(d);
  {
    auto os = open_out(d / (prefix + ".csv"));
    os << "baseline,trials,planned,successes,collisions,success_pct,collision_pct,mean_smoothness,mean_path_length,"
          "mean_min_clearance\n";
    for (const auto& s : r.summary)
      os << to_string(s.baseline) << ',' << s.trials << ',' << s.planned << ',' << s.successes << ',' << s.collisions
         << ',' << num(s.success_rate) << ',' << num(s.collision_rate) << ',' << num(s.mean_smoothness) << ','
         << num(s.mean_path_length) << ',' << num(s.mean_min_clearance) << '\n';
  }
  {
    auto os = open_out(d / (prefix + "_trials.csv"));
    os << "trial,baseline,planned,goal_reached,collision,success,smoothness,path_length,min_clearance,duration,"
          "final_mmd,expansions,failure\n";
    for (const auto& x : r.runs) {
      std::string failure = x.failure;
      std::replace(failure.begin(), failure.end(), ',', ';');
      std::replace(failure.begin(), failure.end(), '\n', ' ');
      os << x.trial << ',' << to_string(x.baseline) << ',' << x.planned << ',' << x.goal_reached << ','
         << x.collision << ',' << x.success << ',' << num(x.smoothness) << ',' << num(x.path_length) << ','
         << num(x.min_clearance) << ',' << num(x.duration) << ',' << num(x.final_mmd) << ',' << x.expansions << ','
         << failure << '\n';
    }
  }
  {
    auto os = open_out(d / (prefix + "_timing.csv"));
    os << "trial,baseline,frontend_seconds,backend_seconds\n";
    for (const auto& x : r.runs)
      os << x.trial << ',' << to_string(x.baseline) << ',' << num(x.frontend_seconds) << ','
         << num(x.backend_seconds) << '\n';
  }
  {
    auto os = open_out(d / (prefix + "_trials.jsonl"));
    for (const auto& x : r.runs) {
      nlohmann::json j;
      j["trial"] = x.trial;
      j["baseline"] = to_string(x.baseline);
      j["planned"] = x.planned;
      j["goal_reached"] = x.goal_reached;
      j["collision"] = x.collision;
      j["success"] = x.success;
      j["smoothness"] = x.smoothness;
      j["path_length"] = x.path_length;
      j["min_clearance"] = x.min_clearance;
      j["duration"] = x.duration;
      j["final_mmd"] = x.final_mmd;
      j["expansions"] = x.expansions;
      if (!x.failure.empty()) j["failure"] = x.failure;
      os << j.dump() << '\n';
    }
  }
}

void print_table(const BenchmarkReport& r, std::ostream& os) {
  os << std::left << std::setw(17) << "baseline" << std::right << std::setw(8) << "trials" << std::setw(11)
     << "success%" << std::setw(13) << "collision%" << std::setw(13) << "smoothness" << std::setw(12) << "time[s]"
     << std::setw(10) << "std[s]" << '\n';
  os << std::fixed;
  for (const auto& s : r.summary) {
    os << std::left << std::setw(17) << to_string(s.baseline) << std::right << std::setw(8) << s.trials
       << std::setprecision(1) << std::setw(11) << s.success_rate << std::setw(13) << s.collision_rate
       << std::setprecision(3) << std::setw(13) << s.mean_smoothness << std::setw(12) << s.mean_seconds
       << std::setw(10) << s.std_seconds << '\n';
  }
  os << std::defaultfloat;
}

Eigen::MatrixXd synthesize_violation_vectors(const Scenario& s, int count, std::uint64_t seed) {
  if (count < 1) fail(ErrorCode::InvalidArgument, "need at least one vector");
  const auto m = static_cast<Eigen::Index>(s.planner.samples_per_point);
  Eigen::MatrixXd out(count, m);
  const double sd = std::max(s.noise.stddev(), 1e-3);
  constexpr int kPerWorld = 50;
  std::optional<DistanceField> field;
  for (int i = 0; i < count; ++i) {
    if (i % kPerWorld == 0) {
      WorldSpec spec = s.world;
      spec.seed = derive_seed({seed, kTagWorld, static_cast<std::uint64_t>(i / kPerWorld)});
      spec.keep_free.clear();
      field.emplace(compute_edt(generate_world(spec), s.distance_clamp));
    }
    CounterRng rng(derive_seed({seed, 0x766563ULL, static_cast<std::uint64_t>(i)}));
    // Safe, marginal, colliding in turn.
    auto wanted = [&](double d) {
      switch (i % 3) {
        case 0: return d >= s.r_safe + 3.0 * sd;
        case 1: return std::abs(d - s.r_safe) <= 2.0 * sd;
        default: return d < std::max(s.r_safe - 2.0 * sd, 0.5 * s.r_safe);
      }
    };
    const Eigen::Vector3d lo = s.world.origin;
    const Eigen::Vector3d ext = s.world.extent;
    std::optional<double> measured;
    for (int attempt = 0; attempt < 20000 && !measured; ++attempt) {
      const Eigen::Vector3d p = lo + Eigen::Vector3d(rng.uniform(), rng.uniform(), rng.uniform()).cwiseProduct(ext);
      const double d = field->query(p);
      if (wanted(d)) measured = d;
    }
    if (!measured) {
      // Sparse worlds may lack the requested band; draw the distance directly.
      const double span = s.r_safe + 4.0 * sd;
      measured = (i % 3 == 0) ? s.r_safe + 3.0 * sd + rng.uniform() * sd
                 : (i % 3 == 1) ? s.r_safe + (rng.uniform() * 4.0 - 2.0) * sd
                                : rng.uniform() * std::min(span, s.r_safe) * 0.5;
    }
    const auto v = to_violations(sample_distances_at(*measured, Eigen::Vector3d::Zero(), s.noise,
                                                     static_cast<std::size_t>(m), rng),
                                 s.r_safe);
    std::vector<double> row = v.values;
    std::sort(row.begin(), row.end(), std::greater<>());
    for (Eigen::Index j = 0; j < m; ++j) out(i, j) = row[static_cast<std::size_t>(j)];
  }
  return out;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) fail(ErrorCode::DimensionMismatch, "rank correlation needs equal lengths");
  if (a.size() < 2) fail(ErrorCode::InvalidArgument, "rank correlation needs at least two points");
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return saa == sbb ? 1.0 : 0.0;
  return sab / std::sqrt(saa * sbb);
}

MmdAblation ablate_mmd(const Eigen::MatrixXd& vectors, const Autoencoder& encoder, int repeats) {
  const auto count = static_cast<int>(vectors.rows());
  const auto m = static_cast<int>(vectors.cols());
  if (count < 2) fail(ErrorCode::InvalidArgument, "ablation needs at least two vectors");
  if (encoder.input_dim() != m) fail(ErrorCode::DimensionMismatch, "encoder input dim must match vector length");
  if (repeats < 1) fail(ErrorCode::InvalidArgument, "repeats must be >= 1");

  MmdAblation a;
  a.vectors = count;
  a.samples = m;
  a.latent_dim = encoder.latent_dim();

  std::vector<std::vector<double>> rows(static_cast<std::size_t>(count));
  std::vector<double> pooled;
  for (int i = 0; i < count; ++i) {
    rows[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = vectors(i, j);
    pooled.insert(pooled.end(), rows[static_cast<std::size_t>(i)].begin(), rows[static_cast<std::size_t>(i)].end());
  }
  const KernelSpec full_k = KernelSpec::rbf(median_bandwidth(pooled));
  const WeightVectors w = WeightVectors::uniform(static_cast<std::size_t>(m));
  const MmdWorkspace ws(full_k, w);

  std::vector<double> latent_pool;
  for (int i = 0; i < count; ++i) {
    const Eigen::VectorXd z = encoder.encode(vectors.row(i).transpose());
    latent_pool.insert(latent_pool.end(), z.data(), z.data() + z.size());
  }
  const KernelSpec latent_k = KernelSpec::rbf(median_bandwidth(latent_pool));
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(encoder.latent_dim());

  a.full.resize(static_cast<std::size_t>(count));
  a.latent.resize(static_cast<std::size_t>(count));
  std::vector<double> full_times, latent_times;
  for (int rep = 0; rep < repeats; ++rep) {
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < count; ++i)
      a.full[static_cast<std::size_t>(i)] =
          mmd_squared(ViolationSamples{rows[static_cast<std::size_t>(i)], 1.0}, w, ws);
    full_times.push_back(seconds_since(t0) / count);
    t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < count; ++i)
      a.latent[static_cast<std::size_t>(i)] = mmd_latent(encoder.encode(vectors.row(i).transpose()), zero, latent_k);
    latent_times.push_back(seconds_since(t0) / count);
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  a.full_median_seconds = median(full_times);
  a.latent_median_seconds = median(latent_times);
  a.speedup = a.latent_median_seconds > 0.0 ? a.full_median_seconds / a.latent_median_seconds : 0.0;
  a.rank_correlation = spearman(a.full, a.latent);

  const Autoencoder id = Autoencoder::identity(m);
  const Eigen::VectorXd zero_m = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < count; ++i) {
    const double via_id = mmd_latent(id.encode(vectors.row(i).transpose()), zero_m, full_k);
    a.identity_max_error = std::max(a.identity_max_error, std::abs(via_id - a.full[static_cast<std::size_t>(i)]));
  }
  return a;
}

void write_mmd_ablation(const MmdAblation& a, const std::string& dir) {
  const std::filesystem::path d(dir);
  std::filesystem::create_directories(d);
  {
    auto os = open_out(d / "mmd_ablation.csv");
    os << "method,samples,dimension,median_seconds\n";
    os << "full," << a.samples << ',' << a.samples << ',' << num(a.full_median_seconds) << '\n';
    os << "latent," << a.samples << ',' << a.latent_dim << ',' << num(a.latent_median_seconds) << '\n';
  }
  {
    auto os = open_out(d / "mmd_ablation_summary.csv");
    os << "vectors,speedup,rank_correlation,identity_max_error\n";
    os << a.vectors << ',' << num(a.speedup) << ',' << num(a.rank_correlation) << ',' << num(a.identity_max_error)
       << '\n';
  }
  {
    auto os = open_out(d / "mmd_ablation_values.csv");
    os << "index,full_mmd,latent_mmd\n";
    for (std::size_t i = 0; i < a.full.size(); ++i) os << i << ',' << num(a.full[i]) << ',' << num(a.latent[i]) << '\n';
  }
}

EncoderTraining train_encoder(const Scenario& s, int vectors, int latent_dim, const TrainConfig& cfg) {
  EncoderTraining out{TrainResult{Autoencoder::identity(1), {}, 0.0}, synthesize_violation_vectors(s, vectors, s.seed)};
  out.result = train(out.data, latent_dim, cfg);
  return out;
}

MmdAblation run_mmd_ablation(const Scenario& s, const Autoencoder* encoder, int vectors, int latent_dim,
                             const TrainConfig& cfg) {
  const Eigen::MatrixXd eval = synthesize_violation_vectors(s, vectors, s.seed);
  if (encoder) return ablate_mmd(eval, *encoder);
  // Train on a disjoint draw so the rank check is out of sample.
  const Eigen::MatrixXd fit = synthesize_violation_vectors(s, vectors, derive_seed({s.seed, kTagTrain}));
  TrainConfig c = cfg;
  c.seed = derive_seed({s.seed, kTagTrain, 1});
  return ablate_mmd(eval, train(fit, latent_dim, c).model);
}

PlanArtifacts plan_scenario(const Scenario& s, Baseline b, int trial) {
  const TrialWorld w = build_trial_world(s, trial);
  PlanArtifacts a;
  PlanOptions opts;
  opts.expansion_sink = [&a](const ExpansionRecord& r) { a.expansions.push_back(r); };
  a.outcome = plan(s, b, w.measured_field, derive_seed({trial_seed(s.seed, trial), kTagPlan}), opts);
  a.score = score(s, a.outcome, w.truth_field, false);
  a.score.trial = trial;
  a.score.baseline = b;
  return a;
}

void write_plan_artifacts(const PlanArtifacts& a, const Scenario& s, const std::string& dir) {
  const std::filesystem::path d(dir);
  std::filesystem::create_directories(d);
  const PlanOutcome& o = a.outcome;
  {
    auto os = open_out(d / "search_trace.csv");
    os << "order,x,y,z,vx,vy,vz,g,h,f,mmd\n";
    for (const auto& e : a.expansions) {
      os << e.order;
      for (int i = 0; i < 3; ++i) os << ',' << num(e.state.position[i]);
      for (int i = 0; i < 3; ++i) os << ',' << num(e.state.velocity[i]);
      os << ',' << num(e.g) << ',' << num(e.h) << ',' << num(e.g + e.h) << ',' << num(e.mmd) << '\n';
    }
  }
  if (o.search) {
    auto os = open_out(d / "frontend_path.csv");
    os << "t,x,y,z,vx,vy,vz,ux,uy,uz,g,h,mmd\n";
    double t = 0.0;
    for (const auto& n : o.search->nodes) {
      t += n.primitive.tau;
      os << num(t);
      for (int i = 0; i < 3; ++i) os << ',' << num(n.state.position[i]);
      for (int i = 0; i < 3; ++i) os << ',' << num(n.state.velocity[i]);
      for (int i = 0; i < 3; ++i) os << ',' << num(n.primitive.u[i]);
      os << ',' << num(n.g) << ',' << num(n.h) << ',' << num(n.mmd) << '\n';
    }
  }
  if (o.initial) write_trajectory_csv(*o.initial, (d / "initial_trajectory.csv").string());
  if (o.cem) {
    write_trajectory_csv(o.cem->coefficients, (d / "trajectory.csv").string());
    auto os = open_out(d / "cem_trace.csv");
    os << "iteration,mean_cost,best_cost,covariance_trace,zero_mass,mmd_total,smoothness,limit_penalty\n";
    for (const auto& it : o.cem->trace)
      os << it.iteration << ',' << num(it.mean_cost.total) << ',' << num(it.best_cost) << ','
         << num(it.covariance_trace) << ',' << num(it.zero_mass) << ',' << num(it.mean_cost.mmd) << ','
         << num(it.mean_cost.smoothness) << ',' << num(it.mean_cost.limit) << '\n';
    auto vs = open_out(d / "violations.csv");
    vs << "iteration,violation\n";
    for (const auto& it : o.cem->trace)
      for (double v : it.violations) vs << it.iteration << ',' << num(v) << '\n';
  }
  nlohmann::json j;
  j["scenario"] = s.name;
  j["baseline"] = to_string(a.score.baseline);
  j["trial"] = a.score.trial;
  j["planned"] = a.score.planned;
  j["success"] = a.score.success;
  j["collision"] = a.score.collision;
  j["goal_reached"] = a.score.goal_reached;
  j["smoothness"] = a.score.smoothness;
  j["path_length"] = a.score.path_length;
  j["min_clearance"] = a.score.min_clearance;
  j["duration"] = a.score.duration;
  j["final_mmd"] = a.score.final_mmd;
  j["expansions"] = a.score.expansions;
  j["frontend_seconds"] = a.score.frontend_seconds;
  j["backend_seconds"] = a.score.backend_seconds;
  if (o.cem) j["bandwidth"] = o.cem->kernel.sigma();
  if (!a.score.failure.empty()) j["failure"] = a.score.failure;
  auto os = open_out(d / "summary.json");
  os << j.dump(2) << '\n';
}

}  // namespace ccv
