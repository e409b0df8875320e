#include "sdafc/synthesis.hpp"

#include <cmath>

#include <json.hpp>

#include "sdafc/clustering.hpp"
#include "sdafc/errors.hpp"
#include "sdafc/rng.hpp"

namespace sdafc {

namespace {

constexpr double kLogFloor = 1e-12;
constexpr double kSigmoidClamp = 30.0;

double sigmoid(double z) {
  z = std::clamp(z, -kSigmoidClamp, kSigmoidClamp);
  return 1.0 / (1.0 + std::exp(-z));
}

Matrix apply_activation(const Matrix& z, Activation act) {
  switch (act) {
    case Activation::Relu:
      return z.cwiseMax(0.0);
    case Activation::Tanh:
      return z.array().tanh().matrix();
    case Activation::Sigmoid:
      return z.unaryExpr([](double v) { return sigmoid(v); });
    case Activation::Identity:
      return z;
  }
  return z;
}

Matrix activation_grad(const Matrix& pre, const Matrix& post, Activation act) {
  switch (act) {
    case Activation::Relu:
      return pre.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
    case Activation::Tanh:
      return (1.0 - post.array().square()).matrix();
    case Activation::Sigmoid:
      return (post.array() * (1.0 - post.array())).matrix();
    case Activation::Identity:
      return Matrix::Ones(pre.rows(), pre.cols());
  }
  return Matrix::Ones(pre.rows(), pre.cols());
}

void check_finite(const Matrix& m, const std::string& where) {
  if (!m.allFinite())
    throw NumericOverflowError("non-finite activation in " + where);
}

}  // namespace

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "identity") return Activation::Identity;
  throw DomainError("unknown activation: " + name);
}

std::string activation_to_string(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Identity: return "identity";
  }
  return "identity";
}

Matrix forward(const MlpNet& net, const Matrix& batch) {
  ForwardCache cache;
  return forward_cached(net, batch, cache);
}

Matrix forward_cached(const MlpNet& net, const Matrix& batch,
                      ForwardCache& cache) {
  if (batch.cols() != net.input_dim())
    throw ContractError("batch width does not match network input dim");
  cache.input = batch;
  cache.pre.clear();
  cache.post.clear();
  Matrix cur = batch;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const Layer& layer = net.layers[l];
    Matrix z = cur * layer.w;
    z.rowwise() += layer.b.transpose();
    check_finite(z, "layer " + std::to_string(l));
    cache.pre.push_back(z);
    cur = apply_activation(z, layer.act);
    cache.post.push_back(cur);
  }
  return cur;
}

Grads Grads::zeros_like(const MlpNet& net) {
  Grads g;
  for (const auto& layer : net.layers) {
    g.dw.push_back(Matrix::Zero(layer.w.rows(), layer.w.cols()));
    g.db.push_back(Vector::Zero(layer.b.size()));
  }
  return g;
}

Matrix backward(const MlpNet& net, const ForwardCache& cache,
                const Matrix& grad_out, Grads& grads) {
  Matrix delta = grad_out;
  for (int l = static_cast<int>(net.layers.size()) - 1; l >= 0; --l) {
    const Layer& layer = net.layers[static_cast<std::size_t>(l)];
    const Matrix& pre = cache.pre[static_cast<std::size_t>(l)];
    const Matrix& post = cache.post[static_cast<std::size_t>(l)];
    delta = delta.cwiseProduct(activation_grad(pre, post, layer.act));
    const Matrix& input =
        l == 0 ? cache.input : cache.post[static_cast<std::size_t>(l - 1)];
    grads.dw[static_cast<std::size_t>(l)] += input.transpose() * delta;
    grads.db[static_cast<std::size_t>(l)] += delta.colwise().sum().transpose();
    if (l > 0) delta = (delta * layer.w.transpose()).eval();
  }
  return delta * net.layers.front().w.transpose();
}

GanGrads gan_grads(const MlpNet& generator, const MlpNet& discriminator,
                   const Matrix& real_batch, const Matrix& latent_batch) {
  if (discriminator.layers.empty() ||
      discriminator.layers.back().act != Activation::Sigmoid)
    throw ContractError("discriminator must end in a sigmoid");

  GanGrads out;
  out.generator = Grads::zeros_like(generator);
  out.discriminator = Grads::zeros_like(discriminator);

  const double nr = static_cast<double>(real_batch.rows());
  const double nf = static_cast<double>(latent_batch.rows());

  // Real term: minimize -mean(log D(x)).
  ForwardCache d_real;
  Matrix p_real = forward_cached(discriminator, real_batch, d_real);
  Matrix grad_real =
      p_real.unaryExpr([nr](double p) {
        return -1.0 / (std::max(p, kLogFloor) * nr);
      });
  backward(discriminator, d_real, grad_real, out.discriminator);

  // Fake pass, shared by both players.
  ForwardCache g_cache;
  Matrix fake = forward_cached(generator, latent_batch, g_cache);
  ForwardCache d_fake;
  Matrix p_fake = forward_cached(discriminator, fake, d_fake);

  // Fake term of the discriminator: minimize -mean(log(1 - D(G(z)))).
  Matrix grad_fake_d =
      p_fake.unaryExpr([nf](double p) {
        return 1.0 / (std::max(1.0 - p, kLogFloor) * nf);
      });
  backward(discriminator, d_fake, grad_fake_d, out.discriminator);

  // Generator, non-saturating: minimize -mean(log D(G(z))).
  Matrix grad_fake_g =
      p_fake.unaryExpr([nf](double p) {
        return -1.0 / (std::max(p, kLogFloor) * nf);
      });
  Grads d_scratch = Grads::zeros_like(discriminator);
  Matrix grad_wrt_fake =
      backward(discriminator, d_fake, grad_fake_g, d_scratch);
  backward(generator, g_cache, grad_wrt_fake, out.generator);

  out.d_loss = 0.0;
  for (Eigen::Index i = 0; i < p_real.rows(); ++i)
    out.d_loss -= std::log(std::max(p_real(i, 0), kLogFloor)) / nr;
  for (Eigen::Index i = 0; i < p_fake.rows(); ++i)
    out.d_loss -= std::log(std::max(1.0 - p_fake(i, 0), kLogFloor)) / nf;
  out.g_loss = 0.0;
  for (Eigen::Index i = 0; i < p_fake.rows(); ++i)
    out.g_loss -= std::log(std::max(p_fake(i, 0), kLogFloor)) / nf;
  return out;
}

AdamState AdamState::zeros_like(const MlpNet& net) {
  AdamState s;
  for (const auto& layer : net.layers) {
    s.mw.push_back(Matrix::Zero(layer.w.rows(), layer.w.cols()));
    s.vw.push_back(Matrix::Zero(layer.w.rows(), layer.w.cols()));
    s.mb.push_back(Vector::Zero(layer.b.size()));
    s.vb.push_back(Vector::Zero(layer.b.size()));
  }
  return s;
}

void adam_step(MlpNet& net, const Grads& grads, AdamState& state, double lr,
               double beta1, double beta2, double eps) {
  ++state.step;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& layer = net.layers[l];
    state.mw[l] = beta1 * state.mw[l] + (1.0 - beta1) * grads.dw[l];
    state.vw[l] =
        beta2 * state.vw[l] + (1.0 - beta2) * grads.dw[l].array().square().matrix();
    layer.w.array() -= lr * (state.mw[l].array() / bc1) /
                       ((state.vw[l].array() / bc2).sqrt() + eps);
    state.mb[l] = beta1 * state.mb[l] + (1.0 - beta1) * grads.db[l];
    state.vb[l] =
        beta2 * state.vb[l] + (1.0 - beta2) * grads.db[l].array().square().matrix();
    layer.b.array() -= lr * (state.mb[l].array() / bc1) /
                       ((state.vb[l].array() / bc2).sqrt() + eps);
  }
}

MlpNet make_mlp(int input_dim, const std::vector<int>& hidden, int output_dim,
                Activation hidden_act, Activation output_act,
                std::uint64_t seed) {
  Rng rng(seed);
  MlpNet net;
  std::vector<int> dims{input_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(output_dim);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Layer layer;
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
    layer.w.resize(fan_in, fan_out);
    for (int i = 0; i < fan_in; ++i)
      for (int j = 0; j < fan_out; ++j) layer.w(i, j) = scale * rng.normal();
    layer.b = Vector::Zero(fan_out);
    layer.act = l + 2 == dims.size() ? output_act : hidden_act;
    net.layers.push_back(std::move(layer));
  }
  return net;
}

Matrix sample_latent(const LatentSpec& latent, int n, Rng& rng) {
  Matrix out = Matrix::Zero(n, latent.dim());
  for (int i = 0; i < n; ++i) {
    const int u = static_cast<int>(
        rng.uniform_int(static_cast<std::uint64_t>(latent.k_categories)));
    out(i, u) = 1.0;
    for (int j = 0; j < latent.noise_dim; ++j)
      out(i, latent.k_categories + j) = rng.normal();
  }
  return out;
}

GeneratorNet train_local_gan(const Matrix& x_local, const GanConfig& cfg) {
  if (x_local.rows() < 1) throw EmptyInputError("empty training data");
  const int n = static_cast<int>(x_local.rows());
  const int d = static_cast<int>(x_local.cols());

  GeneratorNet gen;
  gen.latent = cfg.latent;
  if (gen.latent.noise_dim <= 0) gen.latent.noise_dim = d <= 16 ? 8 : 32;
  gen.net = make_mlp(gen.latent.dim(), cfg.gen_hidden, d, Activation::Relu,
                     Activation::Sigmoid, derive_seed(cfg.seed, {0x60ULL}));
  MlpNet disc = make_mlp(d, cfg.disc_hidden, 1, Activation::Relu,
                         Activation::Sigmoid, derive_seed(cfg.seed, {0xd0ULL}));

  AdamState g_state = AdamState::zeros_like(gen.net);
  AdamState d_state = AdamState::zeros_like(disc);
  Rng rng(derive_seed(cfg.seed, {0x7274ULL}));

  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double d_loss_sum = 0.0, g_loss_sum = 0.0;
    int batches = 0;
    for (int start = 0; start < n; start += cfg.batch_size) {
      const int bs = std::min(cfg.batch_size, n - start);
      Matrix real(bs, d);
      for (int i = 0; i < bs; ++i)
        real.row(i) = x_local.row(order[static_cast<std::size_t>(start + i)]);

      // Discriminator step.
      Matrix z1 = sample_latent(gen.latent, bs, rng);
      GanGrads both = gan_grads(gen.net, disc, real, z1);
      adam_step(disc, both.discriminator, d_state, cfg.learning_rate,
                cfg.beta1, cfg.beta2);

      // Generator step against the updated discriminator.
      Matrix z2 = sample_latent(gen.latent, bs, rng);
      GanGrads g_only = gan_grads(gen.net, disc, real, z2);
      adam_step(gen.net, g_only.generator, g_state, cfg.learning_rate,
                cfg.beta1, cfg.beta2);

      d_loss_sum += both.d_loss;
      g_loss_sum += g_only.g_loss;
      ++batches;
      if (!std::isfinite(both.d_loss) || !std::isfinite(g_only.g_loss))
        throw TrainingDivergedError(
            "non-finite GAN loss at epoch " + std::to_string(epoch), epoch);
    }
    gen.loss_history.emplace_back(d_loss_sum / batches, g_loss_sum / batches);
  }
  return gen;
}

Matrix sample_generator(const GeneratorNet& gen, int n, std::uint64_t seed) {
  if (n < 1) throw PreconditionError("sample count must be >= 1");
  Rng rng(seed);
  Matrix z = sample_latent(gen.latent, n, rng);
  return forward(gen.net, z);
}

Matrix GmmSynthesizer::sample(int n, std::uint64_t seed) const {
  if (n < 1) throw PreconditionError("sample count must be >= 1");
  Rng rng(seed);
  const int k = static_cast<int>(means.rows());
  const Eigen::Index d = means.cols();
  std::vector<double> cum(static_cast<std::size_t>(k));
  double acc = 0.0;
  for (int c = 0; c < k; ++c) {
    acc += weights[static_cast<std::size_t>(c)];
    cum[static_cast<std::size_t>(c)] = acc;
  }
  Matrix out(n, d);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform() * acc;
    int c = 0;
    while (c + 1 < k && u > cum[static_cast<std::size_t>(c)]) ++c;
    for (Eigen::Index j = 0; j < d; ++j)
      out(i, j) = means(c, j) + std::sqrt(variances(c, j)) * rng.normal();
  }
  return out;
}

GmmSynthesizer fit_gmm_synthesizer(const Matrix& x_local, int k,
                                   std::uint64_t seed) {
  if (x_local.rows() < k)
    throw PreconditionError("gmm synthesizer needs n >= k");
  const auto km = kmeans_fit_best(x_local, k, seed, 5);
  GmmSynthesizer gmm;
  gmm.means = km.model.centroids;
  gmm.variances = Matrix::Constant(k, x_local.cols(), 1e-6);
  gmm.weights.assign(static_cast<std::size_t>(k), 0.0);

  Matrix ssq = Matrix::Zero(k, x_local.cols());
  std::vector<long> counts(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < x_local.rows(); ++i) {
    const int c = km.assignment[static_cast<std::size_t>(i)];
    ssq.row(c) +=
        (x_local.row(i) - gmm.means.row(c)).array().square().matrix();
    ++counts[static_cast<std::size_t>(c)];
  }
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0)
      gmm.variances.row(c) =
          (ssq.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]))
              .cwiseMax(1e-6);
    gmm.weights[static_cast<std::size_t>(c)] =
        static_cast<double>(counts[static_cast<std::size_t>(c)]) /
        static_cast<double>(x_local.rows());
  }
  return gmm;
}

std::string generator_to_json(const GeneratorNet& gen) {
  nlohmann::json j;
  j["latent"] = {{"k", gen.latent.k_categories},
                 {"noise_dim", gen.latent.noise_dim}};
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : gen.net.layers) {
    std::vector<double> w(static_cast<std::size_t>(layer.w.size()));
    for (Eigen::Index i = 0; i < layer.w.rows(); ++i)
      for (Eigen::Index c = 0; c < layer.w.cols(); ++c)
        w[static_cast<std::size_t>(i * layer.w.cols() + c)] = layer.w(i, c);
    std::vector<double> b(layer.b.data(), layer.b.data() + layer.b.size());
    layers.push_back({{"rows", layer.w.rows()},
                      {"cols", layer.w.cols()},
                      {"weights", w},
                      {"bias", b},
                      {"activation", activation_to_string(layer.act)}});
  }
  j["layers"] = layers;
  return j.dump();
}

GeneratorNet generator_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  GeneratorNet gen;
  gen.latent.k_categories = j.at("latent").at("k").get<int>();
  gen.latent.noise_dim = j.at("latent").at("noise_dim").get<int>();
  for (const auto& lj : j.at("layers")) {
    Layer layer;
    const auto rows = lj.at("rows").get<Eigen::Index>();
    const auto cols = lj.at("cols").get<Eigen::Index>();
    const auto w = lj.at("weights").get<std::vector<double>>();
    const auto b = lj.at("bias").get<std::vector<double>>();
    layer.w.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index c = 0; c < cols; ++c)
        layer.w(i, c) = w[static_cast<std::size_t>(i * cols + c)];
    layer.b = Eigen::Map<const Vector>(b.data(),
                                       static_cast<Eigen::Index>(b.size()));
    layer.act = activation_from_string(lj.at("activation").get<std::string>());
    gen.net.layers.push_back(std::move(layer));
  }
  return gen;
}

}  // namespace sdafc
