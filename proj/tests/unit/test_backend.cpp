#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ccovoxel/backend.hpp"
#include "ccovoxel/error.hpp"

using namespace ccv;

namespace {

struct World {
  VoxelGrid grid;
  DistanceField field;
};

World make_world(bool obstacle) {
  WorldSpec spec;
  spec.archetype = Archetype::Custom;
  spec.extent = {20, 10, 6};
  spec.resolution = 0.25;
  if (obstacle) spec.cylinders = {{Eigen::Vector2d(10, 5), 1.0, 0.0, 6.0}};
  VoxelGrid g = generate_world(spec);
  DistanceField f = compute_edt(g);
  return {std::move(g), std::move(f)};
}

BoundaryConditions rest(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  BoundaryConditions bc;
  bc.start_position = a;
  bc.end_position = b;
  return bc;
}

// Straight rest-to-rest minimum-jerk motion fitted to the polynomial.
TrajectoryCoefficients straight(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double duration) {
  const int count = 41;
  Eigen::MatrixX3d w(count, 3);
  for (int i = 0; i < count; ++i) {
    const double s = static_cast<double>(i) / (count - 1);
    w.row(i) = (a + (b - a) * (10 * std::pow(s, 3) - 15 * std::pow(s, 4) + 6 * std::pow(s, 5))).transpose();
  }
  return fit_polynomial(w, rest(a, b), kDefaultDegree, duration);
}

const Eigen::Vector3d kStart(3, 5, 3), kGoal(17, 5, 3);

}  // namespace

TEST_CASE("total_cost: free space without noise is smoothness only") {
  const World w = make_world(false);
  const ViolationModel m(w.field, NoiseModel::gaussian(0.0), 0.6);
  CemConfig cfg;
  const TrajectoryCoefficients c = straight(kStart, kGoal, 14.0);
  const CostBreakdown b = total_cost(c, m, cfg);
  CHECK(b.mmd == 0.0);
  CHECK(b.limit == 0.0);
  CHECK(b.penalty == 0.0);
  CHECK(b.total == doctest::Approx(smoothness_cost(c)).epsilon(1e-12));
}

TEST_CASE("total_cost: w = 0 ignores the world and the noise") {
  const World empty = make_world(false), obst = make_world(true);
  CemConfig cfg;
  cfg.w_mmd = 0.0;
  const TrajectoryCoefficients c = straight(kStart, kGoal, 10.0);
  const CostBreakdown a = total_cost(c, ViolationModel(empty.field, NoiseModel::gaussian(0.0), 0.6), cfg);
  const CostBreakdown b = total_cost(c, ViolationModel(obst.field, NoiseModel::gaussian(0.5), 0.6), cfg);
  CHECK(a.total == b.total);
  CHECK(b.mmd == 0.0);
}

TEST_CASE("total_cost: linear in w and consistent with its parts") {
  const World w = make_world(true);
  const ViolationModel m(w.field, NoiseModel::gaussian(0.2), 0.6, 100, KernelSpec::rbf(0.05));
  CemConfig cfg;
  cfg.lambda_smooth = 0.7;
  cfg.lambda_limit = 1.3;
  const TrajectoryCoefficients c = straight(kStart, kGoal, 10.0);
  const CostBreakdown a = total_cost(c, m, cfg);
  cfg.w_mmd *= 2.0;
  const CostBreakdown b = total_cost(c, m, cfg);
  CHECK(a.mmd > 0.0);
  const double base = 0.7 * a.smoothness + 1.3 * a.limit;
  CHECK(std::abs((b.total - base) - 2.0 * (a.total - base)) <= 1e-12 * std::abs(b.total));
  CHECK(std::abs(a.total - (base + 10.0 * a.mmd)) <= 1e-12 * std::abs(a.total));
  CHECK(a.mmd == b.mmd);
}

TEST_CASE("total_cost: points outside the map are penalized, not thrown") {
  const World w = make_world(false);
  const ViolationModel m(w.field, NoiseModel::gaussian(0.2), 0.6);
  CemConfig cfg;
  TrajectoryCoefficients c = straight(kStart, kGoal, 10.0);
  c.control.middleRows(4, 3).col(2).setConstant(40.0);
  const CostBreakdown b = total_cost(c, m, cfg);
  CHECK(b.out_of_bounds_points > 0);
  CHECK(b.penalty == cfg.out_of_bounds_penalty * b.out_of_bounds_points);
}

TEST_CASE("select_elites: examples, ties and permutation") {
  const std::vector<double> costs = {3, 1, 2};
  auto idx = select_elites(costs, 2);
  CHECK(idx == std::vector<std::size_t>{1, 2});
  idx = select_elites(costs, 3);
  std::sort(idx.begin(), idx.end());
  CHECK(idx == std::vector<std::size_t>{0, 1, 2});
  CHECK(select_elites(std::vector<double>{1, 0, 1, 0}, 3) == std::vector<std::size_t>{1, 3, 0});

  const std::vector<double> pool = {5, 2, 9, 1, 7, 3};
  const std::vector<std::size_t> perm = {3, 0, 5, 1, 4, 2};
  std::vector<double> permuted(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) permuted[i] = pool[perm[i]];
  const auto a = select_elites(pool, 3), b = select_elites(permuted, 3);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(perm[b[i]] == a[i]);
  CHECK_THROWS_AS(select_elites(pool, 7), Error);
}

TEST_CASE("update_samples: carries the ceiling share of elites") {
  std::vector<PoolMember> fresh(5), elites(10);
  for (int i = 0; i < 10; ++i) elites[i].cost = i;
  CHECK(update_samples(fresh, elites, 0.0).size() == 5);
  const auto pool = update_samples(fresh, elites, 0.3);
  REQUIRE(pool.size() == 8);
  for (int i = 0; i < 3; ++i) CHECK(pool[5 + i].cost == i);
  CHECK(update_samples(fresh, elites, 0.25).size() == 8);
  CHECK_THROWS_AS(update_samples(fresh, elites, 1.5), Error);
}

TEST_CASE("refit_gaussian: single elite, symmetry and the textbook formulas") {
  const Eigen::VectorXd one = Eigen::VectorXd::LinSpaced(6, -1.0, 2.0);
  const GaussianFit single = refit_gaussian(std::vector<Eigen::VectorXd>{one}, 1e-4);
  CHECK(single.mean == one);
  CHECK(single.sigma == Eigen::VectorXd::Constant(6, 1e-4));

  const Eigen::VectorXd center = Eigen::VectorXd::Constant(4, 0.5);
  const Eigen::VectorXd d = Eigen::VectorXd::LinSpaced(4, 0.1, 0.4);
  const GaussianFit sym = refit_gaussian(std::vector<Eigen::VectorXd>{center + d, center - d}, 1e-4);
  CHECK((sym.mean - center).cwiseAbs().maxCoeff() < 1e-15);

  CounterRng rng(5);
  for (int t = 0; t < 20; ++t) {
    std::vector<Eigen::VectorXd> set(7, Eigen::VectorXd(5));
    for (auto& e : set)
      for (int i = 0; i < 5; ++i) e[i] = rng.uniform() * 4 - 2;
    const GaussianFit f = refit_gaussian(set, 1e-9);
    for (int i = 0; i < 5; ++i) {
      double mean = 0.0;
      for (const auto& e : set) mean += e[i];
      mean /= set.size();
      double var = 0.0;
      for (const auto& e : set) var += (e[i] - mean) * (e[i] - mean);
      CHECK(std::abs(f.mean[i] - mean) <= 1e-12);
      CHECK(std::abs(f.sigma[i] - std::sqrt(var / set.size())) <= 1e-12);
    }
  }
}

TEST_CASE("refit_gaussian: the floor applies only where masked") {
  const Eigen::VectorXd x = Eigen::VectorXd::Ones(3);
  const GaussianFit f = refit_gaussian(std::vector<Eigen::VectorXd>{x, x}, 0.01, {true, false, true});
  CHECK(f.sigma[0] == 0.01);
  CHECK(f.sigma[1] == 0.0);
  CHECK(f.sigma[2] == 0.01);
  CHECK_THROWS_AS(refit_gaussian(std::vector<Eigen::VectorXd>{}, 0.01), Error);
}

TEST_CASE("cem_refine: zero initial spread returns the fitted input") {
  const World w = make_world(true);
  const ViolationModel m(w.field, NoiseModel::gaussian(0.2), 0.6);
  CemConfig cfg;
  cfg.initial_sigma = 0.0;
  const TrajectoryCoefficients c = straight(kStart, kGoal, 10.0);
  const CemResult r = cem_refine(c, rest(kStart, kGoal), m, cfg);
  // Exact once the boundary rows are pinned; the KKT fit meets them to rounding.
  TrajectoryCoefficients pinned = c;
  project_boundary(pinned, rest(kStart, kGoal));
  CHECK(r.coefficients.control == pinned.control);
  CHECK((r.coefficients.control - c.control).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(r.trace.size() == static_cast<std::size_t>(cfg.iterations) + 1);
  for (const auto& it : r.trace) CHECK(it.covariance_trace == 0.0);
}

TEST_CASE("cem_refine: refines around the obstacle deterministically") {
  const World w = make_world(true);
  const ViolationModel m(w.field, NoiseModel::gaussian(0.2), 0.6);
  CemConfig cfg;
  cfg.w_mmd = 1000.0;
  cfg.seed = 3;
  const BoundaryConditions bc = rest(kStart, kGoal);
  const TrajectoryCoefficients c = straight(kStart, kGoal, 10.0);
  const CemResult r = cem_refine(c, bc, m, cfg);

  const TrajectoryPoint s = evaluate(r.coefficients, 0.0), e = evaluate(r.coefficients, r.coefficients.duration);
  CHECK((s.position - kStart).norm() < 1e-8);
  CHECK((e.position - kGoal).norm() < 1e-8);
  CHECK(s.velocity.norm() < 1e-8);
  CHECK(e.acceleration.norm() < 1e-8);

  // The carried elite keeps the best cost from rising.
  for (std::size_t i = 1; i + 1 < r.trace.size(); ++i) CHECK(r.trace[i].best_cost <= r.trace[i - 1].best_cost);
  CHECK(r.trace.back().mean_cost.total <= r.trace.front().mean_cost.total);
  CHECK(r.best_elite_cost <= r.trace.front().best_cost);

  cfg.workers = 2;
  const CemResult again = cem_refine(c, bc, m, cfg);
  CHECK(again.coefficients.control == r.coefficients.control);
  CHECK(again.best_elite_cost == r.best_elite_cost);
}

TEST_CASE("cem_refine: every sample leaving the map is a refinement failure") {
  const World w = make_world(false);
  const ViolationModel m(w.field, NoiseModel::gaussian(0.2), 0.6);
  CemConfig cfg;
  cfg.initial_sigma = 0.0;
  TrajectoryCoefficients c = straight(kStart, kGoal, 10.0);
  c.control.middleRows(4, 3).col(2).setConstant(60.0);
  try {
    cem_refine(c, rest(kStart, kGoal), m, cfg);
    FAIL("expected a refinement failure");
  } catch (const RefinementError& e) {
    CHECK(e.code() == ErrorCode::RefinementFailure);
    CHECK(e.trace().size() == 1);
  }
}

TEST_CASE("cem_refine: invalid configurations") {
  const World w = make_world(false);
  const ViolationModel m(w.field, NoiseModel::gaussian(0.2), 0.6);
  const TrajectoryCoefficients c = straight(kStart, kGoal, 10.0);
  CemConfig cfg;
  cfg.elites = cfg.samples + 1;
  CHECK_THROWS_AS(cem_refine(c, rest(kStart, kGoal), m, cfg), Error);
  cfg = {};
  cfg.memory_fraction = -0.1;
  CHECK_THROWS_AS(cem_refine(c, rest(kStart, kGoal), m, cfg), Error);
}
