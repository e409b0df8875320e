#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "sdafc/dataset.hpp"

namespace sdafc {

class Rng;

enum class Activation { Relu, Tanh, Sigmoid, Identity };

Activation activation_from_string(const std::string& name);
std::string activation_to_string(Activation a);

struct Layer {
  Matrix w;   // in x out
  Vector b;   // out
  Activation act = Activation::Identity;
};

struct MlpNet {
  std::vector<Layer> layers;

  int input_dim() const {
    return layers.empty() ? 0 : static_cast<int>(layers.front().w.rows());
  }
  int output_dim() const {
    return layers.empty() ? 0 : static_cast<int>(layers.back().w.cols());
  }
};

/// Forward pass; rows are samples.
Matrix forward(const MlpNet& net, const Matrix& batch);

struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre;   // pre-activation per layer
  std::vector<Matrix> post;  // post-activation per layer
};

Matrix forward_cached(const MlpNet& net, const Matrix& batch,
                      ForwardCache& cache);

struct Grads {
  std::vector<Matrix> dw;
  std::vector<Vector> db;

  static Grads zeros_like(const MlpNet& net);
};

/// Backpropagate d(loss)/d(output); returns d(loss)/d(input) and
/// accumulates parameter gradients.
Matrix backward(const MlpNet& net, const ForwardCache& cache,
                const Matrix& grad_out, Grads& grads);

struct LatentSpec {
  int k_categories = 1;  // one-hot cluster category
  // Standard-normal dimensions; 0 lets train_local_gan pick 8 for data
  // dimension <= 16 and 32 otherwise.
  int noise_dim = 0;

  int dim() const { return k_categories + noise_dim; }
};

struct GanConfig {
  LatentSpec latent;
  std::vector<int> gen_hidden{64, 128};
  std::vector<int> disc_hidden{128, 64};
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  int batch_size = 64;
  int epochs = 500;
  std::uint64_t seed = 0;
};

struct GeneratorNet {
  MlpNet net;
  LatentSpec latent;
  // (discriminator loss, generator loss) recorded once per epoch.
  std::vector<std::pair<double, double>> loss_history;
};

struct GanGrads {
  Grads generator;
  Grads discriminator;
  double d_loss = 0.0;
  double g_loss = 0.0;
};

/// Gradients of the two-player objective on one batch: the discriminator
/// minimizes -E[log D(x)] - E[log(1 - D(G(z)))], the generator minimizes
/// the non-saturating -E[log D(G(z))]. Latent rows are already e_u | z.
GanGrads gan_grads(const MlpNet& generator, const MlpNet& discriminator,
                   const Matrix& real_batch, const Matrix& latent_batch);

/// Adam optimizer state for one network.
struct AdamState {
  std::vector<Matrix> mw, vw;
  std::vector<Vector> mb, vb;
  long step = 0;

  static AdamState zeros_like(const MlpNet& net);
};

void adam_step(MlpNet& net, const Grads& grads, AdamState& state, double lr,
               double beta1, double beta2, double eps = 1e-8);

/// Alternating D-step / G-step Adam training over shuffled mini-batches.
/// Data values are expected in [0,1].
GeneratorNet train_local_gan(const Matrix& x_local, const GanConfig& cfg);

/// Draw u ~ uniform{0..k-1}, z ~ N(0,I), map e_u|z through the generator.
Matrix sample_generator(const GeneratorNet& gen, int n, std::uint64_t seed);

Matrix sample_latent(const LatentSpec& latent, int n, Rng& rng);

/// Random small-weight network, deterministic given seed.
MlpNet make_mlp(int input_dim, const std::vector<int>& hidden, int output_dim,
                Activation hidden_act, Activation output_act,
                std::uint64_t seed);

/// Diagonal Gaussian mixture fit by k-means seeding plus one covariance
/// pass; a deterministic-quality stand-in for a trained generator.
struct GmmSynthesizer {
  Matrix means;              // k x d
  Matrix variances;          // k x d, floored at 1e-6
  std::vector<double> weights;

  Matrix sample(int n, std::uint64_t seed) const;
};

GmmSynthesizer fit_gmm_synthesizer(const Matrix& x_local, int k,
                                   std::uint64_t seed);

std::string generator_to_json(const GeneratorNet& gen);
GeneratorNet generator_from_json(const std::string& text);

}  // namespace sdafc
