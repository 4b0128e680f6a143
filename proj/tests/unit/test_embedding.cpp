#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include <Eigen/Dense>

#include "ccovoxel/embedding.hpp"
#include "ccovoxel/error.hpp"
#include "ccovoxel/rng.hpp"

using namespace ccv;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
  CounterRng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform() * 2.0 - 1.0;
  return m;
}

// n x m data of exact rank p.
Eigen::MatrixXd low_rank(int n, int m, int p, std::uint64_t seed) {
  return random_matrix(n, p, seed) * random_matrix(p, m, seed + 1);
}

}  // namespace

TEST_CASE("identity autoencoder has zero loss and copies its input") {
  const Eigen::MatrixXd data = random_matrix(20, 6, 1);
  const Autoencoder id = Autoencoder::identity(6);
  TrainConfig cfg;
  cfg.epochs = 3;
  const TrainResult r = train(data, id, cfg);
  CHECK(r.loss_history.front() == 0.0);
  const Eigen::VectorXd v = data.row(3).transpose();
  CHECK(encode(id, v) == v);
}

TEST_CASE("encode: zero maps to zero and the map is linear") {
  const Autoencoder ae = Autoencoder::random(12, 4, 7);
  CHECK(encode(ae, Eigen::VectorXd::Zero(12)).isZero(0.0));
  const Eigen::VectorXd u = random_matrix(12, 1, 2), v = random_matrix(12, 1, 3);
  const double a = 0.7, b = -1.9;
  const Eigen::VectorXd lhs = encode(ae, a * u + b * v);
  const Eigen::VectorXd rhs = a * encode(ae, u) + b * encode(ae, v);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK_THROWS_AS(encode(ae, Eigen::VectorXd::Zero(11)), Error);
}

TEST_CASE("train: rank-p data is reconstructed and loss never increases") {
  const int n = 80, m = 10, p = 3;
  const Eigen::MatrixXd data = low_rank(n, m, p, 11);
  TrainConfig cfg;
  cfg.epochs = 3000;
  cfg.step_size = 0.05;
  cfg.batch_size = 16;
  cfg.seed = 4;
  const TrainResult r = train(data, p, cfg);
  for (std::size_t i = 1; i < r.loss_history.size(); ++i) CHECK(r.loss_history[i] <= r.loss_history[i - 1]);
  CHECK(r.loss_history.size() == static_cast<std::size_t>(cfg.epochs) + 1);
  CHECK(r.loss_history.back() < 1e-4 * data.squaredNorm());

  const Eigen::VectorXd row = data.row(5).transpose();
  const Eigen::VectorXd back = r.model.decode(r.model.encode(row));
  CHECK((back - row).norm() <= 1e-3 * row.norm());
}

TEST_CASE("train: achieved loss is bounded below by the truncated SVD optimum") {
  const Eigen::MatrixXd data = random_matrix(40, 8, 21);
  const int p = 3;
  TrainConfig cfg;
  cfg.epochs = 400;
  cfg.step_size = 0.02;
  cfg.seed = 9;
  const TrainResult r = train(data, p, cfg);
  const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXd>(data).singularValues();
  const double optimum = s.tail(s.size() - p).squaredNorm();
  CHECK(r.loss_history.back() >= optimum * (1.0 - 1e-9));
  CHECK(r.loss_history.back() <= r.loss_history.front());
  for (std::size_t i = 1; i < r.loss_history.size(); ++i) CHECK(r.loss_history[i] <= r.loss_history[i - 1]);
}

TEST_CASE("train: deterministic per seed") {
  const Eigen::MatrixXd data = random_matrix(30, 6, 5);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.step_size = 0.01;
  cfg.seed = 3;
  const TrainResult a = train(data, 2, cfg);
  const TrainResult b = train(data, 2, cfg);
  CHECK(a.loss_history == b.loss_history);
  CHECK(a.model.encoder() == b.model.encoder());
}

TEST_CASE("train: invalid inputs and non-finite data fail") {
  const Eigen::MatrixXd data = random_matrix(10, 5, 6);
  TrainConfig cfg;
  CHECK_THROWS_AS(train(data, 5, cfg), Error);
  CHECK_THROWS_AS(train(data, 0, cfg), Error);
  cfg.step_size = 0.0;
  CHECK_THROWS_AS(train(data, 2, cfg), Error);
  Eigen::MatrixXd bad = data;
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    train(bad, 2, TrainConfig{});
    FAIL("expected a training failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TrainingFailure);
  }
}

TEST_CASE("mmd_latent: zero latent is zero, p = 1 collapses to the scalar form") {
  const KernelSpec k = KernelSpec::rbf(0.2);
  for (LatentMode mode : {LatentMode::CoordinatesAsSamples, LatentMode::VectorAsPoint}) {
    CHECK(mmd_latent(Eigen::VectorXd::Zero(5), Eigen::VectorXd::Zero(5), k, mode) == 0.0);
    for (double c : {0.05, 0.3, 1.0}) {
      Eigen::VectorXd z(1);
      z << c;
      const double scalar = 2.0 - 2.0 * std::exp(-c * c / (2 * 0.2 * 0.2));
      CHECK(std::abs(mmd_latent(z, Eigen::VectorXd::Zero(1), k, mode) - scalar) <= 1e-12);
    }
  }
  CHECK_THROWS_AS(mmd_latent(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(2), k), Error);
}

TEST_CASE("mmd_latent: the Dirac image of any encoder is zero") {
  const Autoencoder ae = Autoencoder::random(20, 5, 8);
  const Eigen::VectorXd dirac = encode(ae, Eigen::VectorXd::Zero(20));
  CHECK(mmd_latent(dirac, Eigen::VectorXd::Zero(5), KernelSpec::rbf(0.1)) == 0.0);
}

TEST_CASE("autoencoder files round-trip exactly") {
  const auto dir = std::filesystem::temp_directory_path() / "ccv_embedding_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "ae.txt").string();
  const Autoencoder ae = Autoencoder::random(9, 4, 12);
  ae.save(path);
  const Autoencoder back = Autoencoder::load(path);
  CHECK(back.encoder() == ae.encoder());
  CHECK(back.decoder() == ae.decoder());
  CHECK_THROWS_AS(Autoencoder::load((dir / "missing.txt").string()), Error);
}
