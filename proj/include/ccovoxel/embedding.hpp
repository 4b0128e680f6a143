#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ccovoxel/rkhs.hpp"

namespace ccv {

/// Linear encoder/decoder pair with no biases, so the zero vector (the Dirac
/// sample set) always encodes to zero.
class Autoencoder {
 public:
  Autoencoder(Eigen::MatrixXd encoder, Eigen::MatrixXd decoder);

  /// Both weights set to the identity; requires p == m.
  static Autoencoder identity(int m);
  /// Small random encoder, decoder initialized to its transpose.
  static Autoencoder random(int m, int p, std::uint64_t seed);

  int input_dim() const { return static_cast<int>(encoder_.rows()); }
  int latent_dim() const { return static_cast<int>(encoder_.cols()); }
  const Eigen::MatrixXd& encoder() const { return encoder_; }
  const Eigen::MatrixXd& decoder() const { return decoder_; }

  /// v W1 for a length-m vector.
  Eigen::VectorXd encode(const Eigen::Ref<const Eigen::VectorXd>& v) const;
  Eigen::VectorXd decode(const Eigen::Ref<const Eigen::VectorXd>& z) const;

  /// ||D W1 W2 - D||_F^2
  double reconstruction_loss(const Eigen::MatrixXd& data) const;

  /// Text format: "ccv-autoencoder 1", "m p", then W1 and W2 row-major.
  void save(const std::string& path) const;
  static Autoencoder load(const std::string& path);

 private:
  Eigen::MatrixXd encoder_;  // m x p
  Eigen::MatrixXd decoder_;  // p x m
};

struct TrainConfig {
  int epochs = 500;
  double step_size = 1e-3;
  int batch_size = 32;
  std::uint64_t seed = 0;
};

struct TrainResult {
  Autoencoder model;
  /// Entry 0 is the loss at initialization, then one entry per epoch.
  std::vector<double> loss_history;
  double final_step_size = 0.0;
};

/// Minibatch SGD on ||D W1 W2 - D||^2. An epoch that raises the loss is
/// rolled back and the step halved, so loss_history never increases.
TrainResult train(const Eigen::MatrixXd& data, int latent_dim, const TrainConfig& cfg);
TrainResult train(const Eigen::MatrixXd& data, Autoencoder init, const TrainConfig& cfg);

Eigen::VectorXd encode(const Autoencoder& ae, const Eigen::Ref<const Eigen::VectorXd>& v);

enum class LatentMode {
  /// Each latent coordinate is one scalar RKHS sample (uniform weights).
  CoordinatesAsSamples,
  /// The whole latent vector is a single multivariate sample.
  VectorAsPoint,
};

double mmd_latent(const Eigen::Ref<const Eigen::VectorXd>& latent, const Eigen::Ref<const Eigen::VectorXd>& latent_dirac,
                  const KernelSpec& spec, LatentMode mode = LatentMode::CoordinatesAsSamples);

}  // namespace ccv
