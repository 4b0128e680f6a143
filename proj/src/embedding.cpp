#include "ccovoxel/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>

#include "ccovoxel/error.hpp"
#include "ccovoxel/rng.hpp"

namespace ccv {

Autoencoder::Autoencoder(Eigen::MatrixXd encoder, Eigen::MatrixXd decoder)
    : encoder_(std::move(encoder)), decoder_(std::move(decoder)) {
  if (encoder_.rows() < 1 || encoder_.cols() < 1) fail(ErrorCode::InvalidArgument, "encoder must be non-empty");
  if (encoder_.cols() > encoder_.rows()) fail(ErrorCode::InvalidArgument, "latent dim must not exceed input dim");
  if (decoder_.rows() != encoder_.cols() || decoder_.cols() != encoder_.rows())
    fail(ErrorCode::DimensionMismatch, "decoder must be p x m for an m x p encoder");
}

Autoencoder Autoencoder::identity(int m) {
  return Autoencoder(Eigen::MatrixXd::Identity(m, m), Eigen::MatrixXd::Identity(m, m));
}

Autoencoder Autoencoder::random(int m, int p, std::uint64_t seed) {
  if (p < 1 || p > m) fail(ErrorCode::InvalidArgument, "latent dim must lie in [1, m]");
  CounterRng rng(derive_seed({seed, 0x696e6974ULL}));
  std::normal_distribution<double> n01(0.0, 1.0 / std::sqrt(static_cast<double>(m)));
  Eigen::MatrixXd w1(m, p);
  for (Eigen::Index j = 0; j < w1.cols(); ++j)
    for (Eigen::Index i = 0; i < w1.rows(); ++i) w1(i, j) = n01(rng);
  Eigen::MatrixXd w2 = w1.transpose();
  return Autoencoder(std::move(w1), std::move(w2));
}

Eigen::VectorXd Autoencoder::encode(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  if (v.size() != encoder_.rows()) fail(ErrorCode::DimensionMismatch, "input length does not match encoder");
  return encoder_.transpose() * v;
}

Eigen::VectorXd Autoencoder::decode(const Eigen::Ref<const Eigen::VectorXd>& z) const {
  if (z.size() != decoder_.rows()) fail(ErrorCode::DimensionMismatch, "latent length does not match decoder");
  return decoder_.transpose() * z;
}

double Autoencoder::reconstruction_loss(const Eigen::MatrixXd& data) const {
  if (data.cols() != encoder_.rows()) fail(ErrorCode::DimensionMismatch, "data width does not match encoder");
  return (data * encoder_ * decoder_ - data).squaredNorm();
}

void Autoencoder::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) fail(ErrorCode::Io, "cannot open " + path + " for writing");
  os << "ccv-autoencoder 1\n" << input_dim() << ' ' << latent_dim() << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  auto dump = [&](const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << m(i, j);
      os << '\n';
    }
  };
  dump(encoder_);
  dump(decoder_);
  if (!os) fail(ErrorCode::Io, "failed writing " + path);
}

Autoencoder Autoencoder::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::Io, "cannot open " + path);
  std::string tag;
  int version = 0, m = 0, p = 0;
  if (!(is >> tag >> version) || tag != "ccv-autoencoder") fail(ErrorCode::Parse, path + ": not an autoencoder file");
  if (version != 1) fail(ErrorCode::Parse, path + ": unsupported autoencoder version");
  if (!(is >> m >> p) || m < 1 || p < 1 || p > m) fail(ErrorCode::Parse, path + ": bad dimensions");
  Eigen::MatrixXd w1(m, p), w2(p, m);
  for (Eigen::Index i = 0; i < w1.rows(); ++i)
    for (Eigen::Index j = 0; j < w1.cols(); ++j)
      if (!(is >> w1(i, j))) fail(ErrorCode::Parse, path + ": truncated encoder");
  for (Eigen::Index i = 0; i < w2.rows(); ++i)
    for (Eigen::Index j = 0; j < w2.cols(); ++j)
      if (!(is >> w2(i, j))) fail(ErrorCode::Parse, path + ": truncated decoder");
  return Autoencoder(std::move(w1), std::move(w2));
}

TrainResult train(const Eigen::MatrixXd& data, int latent_dim, const TrainConfig& cfg) {
  if (latent_dim < 1 || latent_dim >= data.cols())
    fail(ErrorCode::InvalidArgument, "latent dim must satisfy 1 <= p < m");
  return train(data, Autoencoder::random(static_cast<int>(data.cols()), latent_dim, cfg.seed), cfg);
}

TrainResult train(const Eigen::MatrixXd& data, Autoencoder init, const TrainConfig& cfg) {
  if (data.rows() < 1) fail(ErrorCode::InvalidArgument, "training data needs at least one row");
  if (data.cols() != init.input_dim()) fail(ErrorCode::DimensionMismatch, "data width does not match model");
  if (!(cfg.step_size > 0.0)) fail(ErrorCode::InvalidArgument, "step size must be > 0");
  if (cfg.epochs < 0 || cfg.batch_size < 1) fail(ErrorCode::InvalidArgument, "epochs >= 0 and batch size >= 1 required");

  Eigen::MatrixXd w1 = init.encoder();
  Eigen::MatrixXd w2 = init.decoder();
  auto loss_of = [&](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (data * a * b - data).squaredNorm(); };

  double loss = loss_of(w1, w2);
  if (!std::isfinite(loss)) fail(ErrorCode::TrainingFailure, "non-finite loss at epoch 0");
  std::vector<double> history{loss};

  const Eigen::Index rows = data.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(rows));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const double min_step = cfg.step_size * 1e-12;
  double step = cfg.step_size;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (loss == 0.0) {
      history.push_back(loss);
      continue;
    }
    CounterRng rng(derive_seed({cfg.seed, static_cast<std::uint64_t>(epoch)}));
    std::shuffle(order.begin(), order.end(), rng);

    Eigen::MatrixXd n1 = w1, n2 = w2;
    for (Eigen::Index start = 0; start < rows; start += cfg.batch_size) {
      const Eigen::Index b = std::min<Eigen::Index>(cfg.batch_size, rows - start);
      Eigen::MatrixXd batch(b, data.cols());
      for (Eigen::Index r = 0; r < b; ++r) batch.row(r) = data.row(order[static_cast<std::size_t>(start + r)]);
      const Eigen::MatrixXd z = batch * n1;
      const Eigen::MatrixXd resid = z * n2 - batch;
      const double scale = 2.0 / static_cast<double>(b);
      const Eigen::MatrixXd g2 = scale * z.transpose() * resid;
      const Eigen::MatrixXd g1 = scale * batch.transpose() * (resid * n2.transpose());
      n1 -= step * g1;
      n2 -= step * g2;
    }
    const double next = loss_of(n1, n2);
    if (std::isfinite(next) && next <= loss) {
      w1 = std::move(n1);
      w2 = std::move(n2);
      loss = next;
    } else {
      step *= 0.5;
      if (step < min_step)
        fail(ErrorCode::TrainingFailure, "training diverged at epoch " + std::to_string(epoch));
    }
    history.push_back(loss);
  }
  return {Autoencoder(std::move(w1), std::move(w2)), std::move(history), step};
}

Eigen::VectorXd encode(const Autoencoder& ae, const Eigen::Ref<const Eigen::VectorXd>& v) { return ae.encode(v); }

double mmd_latent(const Eigen::Ref<const Eigen::VectorXd>& latent, const Eigen::Ref<const Eigen::VectorXd>& latent_dirac,
                  const KernelSpec& spec, LatentMode mode) {
  if (latent.size() != latent_dirac.size() || latent.size() == 0)
    fail(ErrorCode::DimensionMismatch, "latent and Dirac image must have the same non-zero length");
  if (mode == LatentMode::VectorAsPoint)
    return std::max(0.0, spec(latent, latent) - 2.0 * spec(latent, latent_dirac) + spec(latent_dirac, latent_dirac));

  if (latent_dirac.isZero(0.0))
    return mmd_to_dirac(std::span<const double>(latent.data(), static_cast<std::size_t>(latent.size())), spec);

  const std::span<const double> x(latent.data(), static_cast<std::size_t>(latent.size()));
  const std::span<const double> y(latent_dirac.data(), static_cast<std::size_t>(latent_dirac.size()));
  const double p = static_cast<double>(x.size());
  double xx = 0.0, xy = 0.0, yy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      xx += spec(x[i], x[j]);
      xy += spec(x[i], y[j]);
      yy += spec(y[i], y[j]);
    }
  }
  return std::max(0.0, (xx - 2.0 * xy + yy) / (p * p));
}

}  // namespace ccv
