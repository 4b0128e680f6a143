#include <doctest.h>

#include <cmath>
#include <vector>

#include "ccovoxel/error.hpp"
#include "ccovoxel/rkhs.hpp"
#include "oracles.hpp"

using namespace ccv;

namespace {

ViolationSamples vs(std::vector<double> v) {
  ViolationSamples s;
  s.values = std::move(v);
  return s;
}

// Random violations with a share of exact zeros, like real samples.
std::vector<double> random_violations(CounterRng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform() < 0.4 ? 0.0 : rng.uniform() * 0.8;
  return v;
}

std::vector<double> random_simplex(CounterRng& rng, std::size_t n) {
  std::vector<double> w(n);
  double s = 0.0;
  for (auto& x : w) s += (x = 0.05 + rng.uniform());
  for (auto& x : w) x /= s;
  return w;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

TEST_CASE("kernel_eval: examples") {
  const KernelSpec rbf = KernelSpec::rbf(1.0);
  CHECK(kernel_eval(rbf, 0.37, 0.37) == 1.0);
  CHECK(kernel_eval(rbf, 1.0, 0.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(kernel_eval(rbf, 1.0, 0.0) == doctest::Approx(0.60653).epsilon(1e-5));
  const KernelSpec poly = KernelSpec::polynomial(2, 1.0);
  for (double y : {-3.0, 0.0, 0.5, 12.0}) CHECK(kernel_eval(poly, 0.0, y) == 1.0);
  CHECK(kernel_eval(poly, 2.0, 3.0) == 49.0);
}

TEST_CASE("kernel specs validate their parameters") {
  CHECK_THROWS_AS(KernelSpec::rbf(0.0), Error);
  CHECK_THROWS_AS(KernelSpec::polynomial(0, 1.0), Error);
  CHECK_THROWS_AS(KernelSpec::polynomial(2, 1.0).sigma(), Error);
}

TEST_CASE("build_kff: all-zero violations give an all-ones matrix") {
  const Eigen::MatrixXd k = build_kff(vs(std::vector<double>(6, 0.0)), KernelSpec::rbf(0.3));
  CHECK(k == Eigen::MatrixXd::Ones(6, 6));
}

TEST_CASE("build_kff: symmetric and equal to the naive double loop") {
  CounterRng rng(4);
  const auto v = random_violations(rng, 10);
  const KernelSpec spec = KernelSpec::rbf(0.2);
  const Eigen::MatrixXd k = build_kff(vs(v), spec);
  CHECK(k == k.transpose());
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) CHECK(k(i, j) == oracle::rbf(v[i], v[j], 0.2));
}

TEST_CASE("build_gram: mirrored fill evaluates the kernel n(n+1)/2 times") {
  for (std::size_t n : {1, 2, 7, 31}) {
    std::vector<double> v(n, 0.25);
    std::size_t calls = 0;
    build_gram(v, [&](double, double) {
      ++calls;
      return 1.0;
    });
    CHECK(calls == n * (n + 1) / 2);
  }
}

TEST_CASE("mmd_squared: all-zero violations give exactly zero") {
  for (std::size_t n : {1, 5, 100}) {
    const WeightVectors w = WeightVectors::uniform(n);
    const MmdWorkspace ws(KernelSpec::rbf(0.1), w);
    CHECK(mmd_squared(vs(std::vector<double>(n, 0.0)), w, ws) == 0.0);
  }
}

TEST_CASE("mmd_squared: single sample closed form and strict monotonicity in c") {
  const double sigma = 0.3;
  const WeightVectors w = WeightVectors::uniform(1);
  const MmdWorkspace ws(KernelSpec::rbf(sigma), w);
  double prev = -1.0;
  for (int k = 1; k <= 40; ++k) {
    const double c = 0.025 * k;
    const double got = mmd_squared(vs({c}), w, ws);
    CHECK(std::abs(got - (2.0 - 2.0 * std::exp(-c * c / (2 * sigma * sigma)))) <= 1e-12);
    CHECK(got > prev);
    prev = got;
  }
}

TEST_CASE("mmd_squared: two-sample hand expansion") {
  const double c = 0.4, sigma = 0.25;
  const WeightVectors w = WeightVectors::uniform(2);
  const MmdWorkspace ws(KernelSpec::rbf(sigma), w);
  const double expected = 0.5 * (1.0 - std::exp(-c * c / (2 * sigma * sigma)));
  CHECK(std::abs(mmd_squared(vs({0.0, c}), w, ws) - expected) < 1e-14);
  CHECK(std::abs(mmd_squared_naive(vs({0.0, c}), w, KernelSpec::rbf(sigma)) - expected) < 1e-14);
}

TEST_CASE("mmd_squared: matches the double-sum oracle with random weights") {
  CounterRng rng(10);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng() % 50;
    const auto v = random_violations(rng, n);
    const auto a = random_simplex(rng, n), b = random_simplex(rng, n);
    const double sigma = 0.01 + rng.uniform();
    const WeightVectors w{to_eigen(a), to_eigen(b)};
    const MmdWorkspace ws(KernelSpec::rbf(sigma), w);
    const double got = mmd_squared(vs(v), w, ws);
    CHECK(got >= 0.0);
    CHECK(std::abs(got - oracle::mmd_double_sum(v, a, b, sigma)) <= 1e-10);
    CHECK(std::abs(mmd_squared_naive(vs(v), w, KernelSpec::rbf(sigma)) - got) <= 1e-10);
  }
}

TEST_CASE("mmd_squared: length mismatches are rejected") {
  const WeightVectors w = WeightVectors::uniform(3);
  const MmdWorkspace ws(KernelSpec::rbf(0.1), w);
  try {
    mmd_squared(vs({0.1, 0.2}), w, ws);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
  WeightVectors bad = w;
  bad.alpha(0) = 0.9;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("mmd_to_dirac: equals the uniform matrix form, including the cutoff regime") {
  CounterRng rng(12);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng() % 120;
    const auto v = random_violations(rng, n);
    const double sigma = t % 2 ? 1e-3 : 0.01 + rng.uniform() * 0.5;
    const WeightVectors w = WeightVectors::uniform(n);
    const MmdWorkspace ws(KernelSpec::rbf(sigma), w);
    CHECK(std::abs(mmd_to_dirac(v, KernelSpec::rbf(sigma)) - mmd_squared(vs(v), w, ws)) <= 1e-10);
  }
  CHECK(mmd_to_dirac(std::vector<double>(10, 0.0), KernelSpec::rbf(0.2)) == 0.0);
}

TEST_CASE("mmd_to_dirac: polynomial kernel agrees with the matrix form") {
  CounterRng rng(13);
  const auto v = random_violations(rng, 30);
  const KernelSpec poly = KernelSpec::polynomial(3, 1.0);
  const WeightVectors w = WeightVectors::uniform(30);
  const MmdWorkspace ws(poly, w);
  CHECK(std::abs(mmd_to_dirac(v, poly) - mmd_squared(vs(v), w, ws)) <= 1e-10);
}

TEST_CASE("median_bandwidth: median pairwise gap with a floor") {
  const std::vector<double> v = {0.0, 1.0, 3.0};
  // Pairwise gaps 1, 2, 3.
  CHECK(median_bandwidth(v) == doctest::Approx(2.0));
  CHECK(median_bandwidth(std::vector<double>(20, 0.0)) == kBandwidthFloor);
  CHECK(median_bandwidth(std::vector<double>(20, 0.0), 0.05) == 0.05);
}
