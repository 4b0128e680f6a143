#include "ccovoxel/backend.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "ccovoxel/rng.hpp"

namespace ccv {

std::vector<double> eval_times(const TrajectoryCoefficients& coeffs, int eval_points) {
  if (eval_points < 2) fail(ErrorCode::InvalidArgument, "need at least two evaluation points");
  std::vector<double> t(static_cast<std::size_t>(eval_points));
  for (int k = 0; k < eval_points; ++k) t[static_cast<std::size_t>(k)] = coeffs.duration * k / (eval_points - 1);
  return t;
}

std::uint64_t eval_stream(std::uint64_t seed, int k) {
  return derive_seed({seed, 0x6576616cULL, static_cast<std::uint64_t>(k)});
}

CostBreakdown total_cost(const TrajectoryCoefficients& coeffs, const ViolationModel& model, const CemConfig& cfg) {
  CostBreakdown c;
  c.smoothness = smoothness_cost(coeffs);
  c.limit = limit_penalty(coeffs, cfg.limits);
  if (cfg.lambda_second_difference != 0.0) c.second_difference = second_difference_cost(coeffs);
  const DistanceField& field = model.field();
  const auto times = eval_times(coeffs, cfg.eval_points);
  for (int k = 0; k < cfg.eval_points; ++k) {
    const Eigen::Vector3d p = evaluate(coeffs, times[static_cast<std::size_t>(k)]).position;
    if (!field.inside(p)) {
      c.penalty += cfg.out_of_bounds_penalty;
      ++c.out_of_bounds_points;
      continue;
    }
    if (cfg.hard_clearance > 0.0) {
      const double d = field.query(p);
      if (d < cfg.hard_clearance) c.penalty += cfg.clearance_penalty * (1.0 + cfg.hard_clearance - d);
    }
    if (cfg.w_mmd != 0.0) c.mmd += model.mmd(p, eval_stream(cfg.seed, k));
  }
  c.total = cfg.lambda_smooth * c.smoothness + cfg.lambda_limit * c.limit + cfg.w_mmd * c.mmd +
            cfg.lambda_second_difference * c.second_difference + c.penalty;
  return c;
}

std::vector<double> trajectory_violations(const TrajectoryCoefficients& coeffs, const ViolationModel& model,
                                          const CemConfig& cfg) {
  std::vector<double> pooled;
  const auto times = eval_times(coeffs, cfg.eval_points);
  for (int k = 0; k < cfg.eval_points; ++k) {
    const Eigen::Vector3d p = evaluate(coeffs, times[static_cast<std::size_t>(k)]).position;
    if (!model.field().inside(p)) continue;
    const auto v = model.violations(p, eval_stream(cfg.seed, k));
    pooled.insert(pooled.end(), v.values.begin(), v.values.end());
  }
  return pooled;
}

std::vector<std::size_t> select_elites(std::span<const double> costs, int q) {
  if (q < 1 || static_cast<std::size_t>(q) > costs.size())
    fail(ErrorCode::InvalidArgument, "elite count must lie in [1, pool size]");
  std::vector<std::size_t> idx(costs.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return costs[a] < costs[b]; });
  idx.resize(static_cast<std::size_t>(q));
  return idx;
}

std::vector<PoolMember> update_samples(std::vector<PoolMember> fresh, std::span<const PoolMember> elites,
                                       double memory_fraction) {
  if (memory_fraction < 0.0 || memory_fraction > 1.0)
    fail(ErrorCode::InvalidArgument, "memory fraction must lie in [0, 1]");
  const auto keep = std::min(elites.size(),
                             static_cast<std::size_t>(std::ceil(memory_fraction * static_cast<double>(elites.size()))));
  fresh.insert(fresh.end(), elites.begin(), elites.begin() + static_cast<std::ptrdiff_t>(keep));
  return fresh;
}

GaussianFit refit_gaussian(std::span<const Eigen::VectorXd> elites, double sigma_min, const std::vector<bool>& floor_mask) {
  if (elites.empty()) fail(ErrorCode::InvalidArgument, "cannot refit from zero elites");
  const auto dim = elites.front().size();
  for (const auto& e : elites)
    if (e.size() != dim) fail(ErrorCode::DimensionMismatch, "elites differ in dimension");
  if (!floor_mask.empty() && static_cast<Eigen::Index>(floor_mask.size()) != dim)
    fail(ErrorCode::DimensionMismatch, "floor mask does not match elite dimension");
  const double q = static_cast<double>(elites.size());
  // Shifted by the first elite so identical elites reproduce it bit for bit.
  const Eigen::VectorXd& ref = elites.front();
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(dim);
  for (const auto& e : elites) shift += e - ref;
  GaussianFit fit;
  fit.mean = ref + shift / q;
  Eigen::VectorXd var = Eigen::VectorXd::Zero(dim);
  for (const auto& e : elites) var += (e - fit.mean).cwiseAbs2();
  fit.sigma = (var / q).cwiseSqrt();
  for (Eigen::Index i = 0; i < dim; ++i)
    if (floor_mask.empty() || floor_mask[static_cast<std::size_t>(i)]) fit.sigma[i] = std::max(fit.sigma[i], sigma_min);
  return fit;
}

namespace {

void validate(const CemConfig& cfg) {
  if (cfg.samples < 1) fail(ErrorCode::InvalidArgument, "CEM needs at least one sample");
  if (cfg.iterations < 0) fail(ErrorCode::InvalidArgument, "iterations must be >= 0");
  if (cfg.elites < 1 || cfg.elites > cfg.samples) fail(ErrorCode::InvalidArgument, "elites must lie in [1, samples]");
  if (cfg.memory_fraction < 0.0 || cfg.memory_fraction > 1.0)
    fail(ErrorCode::InvalidArgument, "memory fraction must lie in [0, 1]");
  if (cfg.eval_points < 2) fail(ErrorCode::InvalidArgument, "need at least two evaluation points");
  if (!(cfg.initial_sigma >= 0.0) || !(cfg.sigma_min >= 0.0))
    fail(ErrorCode::InvalidArgument, "standard deviations must be >= 0");
}

// Scores every pool member; the split over threads does not affect results.
void score_pool(std::vector<PoolMember>& pool, const TrajectoryCoefficients& shape, const ViolationModel& model,
                const CemConfig& cfg, std::vector<int>& oob) {
  oob.assign(pool.size(), 0);
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < pool.size(); i += stride) {
      const auto c = total_cost(TrajectoryCoefficients::from_flat(pool[i].x, shape.degree, shape.duration), model, cfg);
      pool[i].cost = c.total;
      oob[i] = c.out_of_bounds_points;
    }
  };
  const auto workers = static_cast<std::size_t>(std::max(1, cfg.workers));
  if (workers == 1 || pool.size() < 2) {
    work(0, 1);
    return;
  }
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work, w, workers);
  for (auto& t : threads) t.join();
}

CemIteration snapshot(int iteration, const TrajectoryCoefficients& mean, const Eigen::VectorXd& sigma,
                      const ViolationModel& model, const CemConfig& cfg) {
  CemIteration it;
  it.iteration = iteration;
  it.mean_cost = total_cost(mean, model, cfg);
  it.covariance_trace = sigma.squaredNorm();
  it.violations = trajectory_violations(mean, model, cfg);
  if (!it.violations.empty()) {
    const auto zeros = std::count(it.violations.begin(), it.violations.end(), 0.0);
    it.zero_mass = static_cast<double>(zeros) / static_cast<double>(it.violations.size());
  }
  return it;
}

}  // namespace

CemResult cem_refine(const TrajectoryCoefficients& initial, const BoundaryConditions& boundary,
                     const ViolationModel& model, const CemConfig& cfg) {
  validate(cfg);
  TrajectoryCoefficients mean = initial;
  project_boundary(mean, boundary);
  const int n = mean.degree;
  const auto rows = static_cast<Eigen::Index>(n + 1);
  const Eigen::Index dim = 3 * rows;

  CemResult result;
  result.kernel = model.kernel();
  if (cfg.bandwidth && cfg.w_mmd != 0.0) result.kernel = resolve_kernel(*cfg.bandwidth, trajectory_violations(mean, model, cfg));
  const ViolationModel m = model.with_kernel(result.kernel);

  // The boundary pins the first and last three control points of every axis.
  std::vector<bool> free(static_cast<std::size_t>(dim), true);
  for (Eigen::Index ax = 0; ax < 3; ++ax)
    for (Eigen::Index r : {Eigen::Index{0}, Eigen::Index{1}, Eigen::Index{2}, rows - 3, rows - 2, rows - 1})
      free[static_cast<std::size_t>(ax * rows + r)] = false;
  Eigen::VectorXd sigma = Eigen::VectorXd::Zero(dim);
  std::vector<bool> floor_mask(static_cast<std::size_t>(dim), false);
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (!free[static_cast<std::size_t>(i)]) continue;
    sigma[i] = cfg.initial_sigma;
    floor_mask[static_cast<std::size_t>(i)] = cfg.initial_sigma > 0.0;
  }

  std::vector<PoolMember> memory;
  bool have_best = false;
  for (int it = 0; it < cfg.iterations; ++it) {
    result.trace.push_back(snapshot(it, mean, sigma, m, cfg));
    const Eigen::VectorXd mu = mean.flat();

    std::vector<PoolMember> fresh(static_cast<std::size_t>(cfg.samples));
    for (int s = 0; s < cfg.samples; ++s) {
      CounterRng rng(derive_seed({cfg.seed, 0x63656dULL, static_cast<std::uint64_t>(it), static_cast<std::uint64_t>(s)}));
      std::normal_distribution<double> z(0.0, 1.0);
      Eigen::VectorXd x = mu;
      for (Eigen::Index i = 0; i < dim; ++i)
        if (sigma[i] != 0.0) x[i] += sigma[i] * z(rng);
      auto c = TrajectoryCoefficients::from_flat(x, n, mean.duration);
      project_boundary(c, boundary);
      fresh[static_cast<std::size_t>(s)].x = c.flat();
    }
    std::vector<PoolMember> pool = update_samples(std::move(fresh), memory, cfg.memory_fraction);
    std::vector<int> oob;
    score_pool(pool, mean, m, cfg, oob);
    if (std::all_of(oob.begin(), oob.end(), [](int k) { return k > 0; })) {
      std::ostringstream os;
      os << "every CEM sample left the map at iteration " << it;
      throw RefinementError(os.str(), result.trace);
    }

    std::vector<double> costs(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) costs[i] = pool[i].cost;
    const auto q = std::min<int>(cfg.elites, static_cast<int>(pool.size()));
    const auto idx = select_elites(costs, q);
    memory.clear();
    std::vector<Eigen::VectorXd> elite_x;
    for (std::size_t i : idx) {
      memory.push_back(pool[i]);
      elite_x.push_back(pool[i].x);
    }
    result.trace.back().best_cost = pool[idx.front()].cost;
    if (!have_best || pool[idx.front()].cost < result.best_elite_cost) {
      have_best = true;
      result.best_elite_cost = pool[idx.front()].cost;
      result.best_elite = TrajectoryCoefficients::from_flat(pool[idx.front()].x, n, mean.duration);
    }

    const GaussianFit fit = refit_gaussian(elite_x, cfg.sigma_min, floor_mask);
    mean = TrajectoryCoefficients::from_flat(fit.mean, n, mean.duration);
    sigma = fit.sigma;
  }
  result.trace.push_back(snapshot(cfg.iterations, mean, sigma, m, cfg));
  result.trace.back().best_cost = have_best ? result.best_elite_cost : result.trace.back().mean_cost.total;
  if (!have_best) {
    result.best_elite = mean;
    result.best_elite_cost = result.trace.back().mean_cost.total;
  }
  result.coefficients = mean;
  return result;
}

}  // namespace ccv
