#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rae/rng.hpp"

namespace rae {

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};
struct EmptyDataset : std::runtime_error {
  explicit EmptyDataset(const std::string& what) : std::runtime_error(what) {}
};

struct Sample {
  std::vector<double> x;
  int label = 0;
};

struct TrainConfig {
  double learning_rate = 0.01;  // useful range roughly [1e-3, 1e-1]
  int epochs = 100;
  int batch_size = 16;
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct EpochMetrics {
  double train_loss = 0;
  double val_loss = 0;
  double val_accuracy = 0;
};

/// Two linear layers with a rectifier in between, trained by plain SGD
/// on the cross-entropy loss. Weights start at zero (giving uniform
/// logits) until randomize() or train() initializes them.
class Mlp {
 public:
  Mlp() = default;
  Mlp(int in, int hidden, int out)
      : in_(in), hidden_(hidden), out_(out),
        w1_(static_cast<std::size_t>(hidden) * in, 0.0), b1_(static_cast<std::size_t>(hidden), 0.0),
        w2_(static_cast<std::size_t>(out) * hidden, 0.0), b2_(static_cast<std::size_t>(out), 0.0) {
    if (in <= 0 || hidden <= 0 || out <= 0) throw DimensionMismatch("non-positive layer size");
  }

  int input_dim() const { return in_; }
  int hidden_dim() const { return hidden_; }
  int output_dim() const { return out_; }

  void randomize(RngStream& rng) {
    double s1 = 1.0 / std::sqrt(static_cast<double>(in_));
    double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_));
    for (auto& w : w1_) w = rng.uniform(-s1, s1);
    for (auto& w : w2_) w = rng.uniform(-s2, s2);
    std::fill(b1_.begin(), b1_.end(), 0.0);
    std::fill(b2_.begin(), b2_.end(), 0.0);
  }

  std::vector<double> forward(const std::vector<double>& x) const {
    check_input(x);
    std::vector<double> h(static_cast<std::size_t>(hidden_));
    for (int j = 0; j < hidden_; ++j) {
      double z = b1_[static_cast<std::size_t>(j)];
      const double* row = &w1_[static_cast<std::size_t>(j) * in_];
      for (int i = 0; i < in_; ++i) z += row[i] * x[static_cast<std::size_t>(i)];
      h[static_cast<std::size_t>(j)] = z > 0 ? z : 0;
    }
    std::vector<double> logits(static_cast<std::size_t>(out_));
    for (int k = 0; k < out_; ++k) {
      double z = b2_[static_cast<std::size_t>(k)];
      const double* row = &w2_[static_cast<std::size_t>(k) * hidden_];
      for (int j = 0; j < hidden_; ++j) z += row[j] * h[static_cast<std::size_t>(j)];
      logits[static_cast<std::size_t>(k)] = z;
    }
    return logits;
  }

  static std::vector<double> softmax(const std::vector<double>& logits) {
    double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double total = 0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
      p[i] = std::exp(logits[i] - mx);
      total += p[i];
    }
    for (auto& v : p) v /= total;
    return p;
  }

  /// Cross-entropy of one sample.
  double loss(const std::vector<double>& x, int label) const {
    std::vector<double> p = softmax(forward(x));
    return -std::log(std::max(p[static_cast<std::size_t>(label)], 1e-300));
  }

  int predict(const std::vector<double>& x) const {
    std::vector<double> logits = forward(x);
    return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
  }

  /// Logit ranking, best first; ties keep the lower index first.
  std::vector<std::size_t> ranking(const std::vector<double>& x) const {
    std::vector<double> logits = forward(x);
    std::vector<std::size_t> idx(logits.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return logits[a] > logits[b]; });
    return idx;
  }

  struct Gradients {
    std::vector<double> w1, b1, w2, b2;
  };

  Gradients zero_grad() const {
    return Gradients{std::vector<double>(w1_.size(), 0.0), std::vector<double>(b1_.size(), 0.0),
                     std::vector<double>(w2_.size(), 0.0), std::vector<double>(b2_.size(), 0.0)};
  }

  /// Adds this sample's cross-entropy gradient into g; returns its loss.
  double accumulate(const std::vector<double>& x, int label, Gradients& g) const {
    check_input(x);
    std::vector<double> z1(static_cast<std::size_t>(hidden_));
    std::vector<double> h(static_cast<std::size_t>(hidden_));
    for (int j = 0; j < hidden_; ++j) {
      double z = b1_[static_cast<std::size_t>(j)];
      const double* row = &w1_[static_cast<std::size_t>(j) * in_];
      for (int i = 0; i < in_; ++i) z += row[i] * x[static_cast<std::size_t>(i)];
      z1[static_cast<std::size_t>(j)] = z;
      h[static_cast<std::size_t>(j)] = z > 0 ? z : 0;
    }
    std::vector<double> logits(static_cast<std::size_t>(out_));
    for (int k = 0; k < out_; ++k) {
      double z = b2_[static_cast<std::size_t>(k)];
      const double* row = &w2_[static_cast<std::size_t>(k) * hidden_];
      for (int j = 0; j < hidden_; ++j) z += row[j] * h[static_cast<std::size_t>(j)];
      logits[static_cast<std::size_t>(k)] = z;
    }
    std::vector<double> p = softmax(logits);
    double sample_loss = -std::log(std::max(p[static_cast<std::size_t>(label)], 1e-300));

    // dL/dz2 = p - onehot(label)
    std::vector<double> dz2 = p;
    dz2[static_cast<std::size_t>(label)] -= 1.0;
    for (int k = 0; k < out_; ++k) {
      g.b2[static_cast<std::size_t>(k)] += dz2[static_cast<std::size_t>(k)];
      double* grow = &g.w2[static_cast<std::size_t>(k) * hidden_];
      for (int j = 0; j < hidden_; ++j)
        grow[j] += dz2[static_cast<std::size_t>(k)] * h[static_cast<std::size_t>(j)];
    }
    for (int j = 0; j < hidden_; ++j) {
      if (z1[static_cast<std::size_t>(j)] <= 0) continue;
      double dh = 0;
      for (int k = 0; k < out_; ++k)
        dh += w2_[static_cast<std::size_t>(k) * hidden_ + j] * dz2[static_cast<std::size_t>(k)];
      g.b1[static_cast<std::size_t>(j)] += dh;
      double* grow = &g.w1[static_cast<std::size_t>(j) * in_];
      for (int i = 0; i < in_; ++i) grow[i] += dh * x[static_cast<std::size_t>(i)];
    }
    return sample_loss;
  }

  void sgd_step(const Gradients& g, double lr, double scale) {
    double f = lr * scale;
    for (std::size_t i = 0; i < w1_.size(); ++i) w1_[i] -= f * g.w1[i];
    for (std::size_t i = 0; i < b1_.size(); ++i) b1_[i] -= f * g.b1[i];
    for (std::size_t i = 0; i < w2_.size(); ++i) w2_[i] -= f * g.w2[i];
    for (std::size_t i = 0; i < b2_.size(); ++i) b2_[i] -= f * g.b2[i];
  }

  // Flat views for gradient checking and persistence.
  std::vector<double*> parameters() {
    std::vector<double*> ps;
    for (auto& w : w1_) ps.push_back(&w);
    for (auto& b : b1_) ps.push_back(&b);
    for (auto& w : w2_) ps.push_back(&w);
    for (auto& b : b2_) ps.push_back(&b);
    return ps;
  }
  std::vector<double> gradient_flat(const Gradients& g) const {
    std::vector<double> out;
    out.insert(out.end(), g.w1.begin(), g.w1.end());
    out.insert(out.end(), g.b1.begin(), g.b1.end());
    out.insert(out.end(), g.w2.begin(), g.w2.end());
    out.insert(out.end(), g.b2.begin(), g.b2.end());
    return out;
  }

  nlohmann::json to_json() const {
    return nlohmann::json{{"in", in_},   {"hidden", hidden_}, {"out", out_}, {"w1", w1_},
                          {"b1", b1_},   {"w2", w2_},         {"b2", b2_}};
  }
  static Mlp from_json(const nlohmann::json& j) {
    Mlp m(j.at("in").get<int>(), j.at("hidden").get<int>(), j.at("out").get<int>());
    m.w1_ = j.at("w1").get<std::vector<double>>();
    m.b1_ = j.at("b1").get<std::vector<double>>();
    m.w2_ = j.at("w2").get<std::vector<double>>();
    m.b2_ = j.at("b2").get<std::vector<double>>();
    if (m.w1_.size() != static_cast<std::size_t>(m.in_) * m.hidden_ ||
        m.w2_.size() != static_cast<std::size_t>(m.hidden_) * m.out_)
      throw DimensionMismatch("model file weight shapes are inconsistent");
    return m;
  }

 private:
  void check_input(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != in_)
      throw DimensionMismatch("input size " + std::to_string(x.size()) + " != " +
                              std::to_string(in_));
  }

  int in_ = 0, hidden_ = 0, out_ = 0;
  std::vector<double> w1_, b1_, w2_, b2_;
};

/// SGD over shuffled mini-batches with a held-out validation split.
/// Deterministic for a fixed config seed.
inline std::vector<EpochMetrics> train(Mlp& mlp, const std::vector<Sample>& dataset,
                                       const TrainConfig& config) {
  if (dataset.empty()) throw EmptyDataset("no training records");
  if (!(config.validation_fraction > 0.0 && config.validation_fraction < 1.0))
    throw std::invalid_argument("validation fraction must lie in (0,1)");
  for (const auto& s : dataset) {
    if (static_cast<int>(s.x.size()) != mlp.input_dim())
      throw DimensionMismatch("sample width != model input");
    if (s.label < 0 || s.label >= mlp.output_dim())
      throw DimensionMismatch("label outside the model output range");
  }

  RngStream rng(config.seed, "train");
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng.engine());

  std::size_t n_val = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::round(config.validation_fraction * dataset.size())));
  if (n_val >= dataset.size()) n_val = dataset.size() - 1;
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> tr(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

  mlp.randomize(rng);

  std::vector<EpochMetrics> history;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(tr.begin(), tr.end(), rng.engine());
    double loss_sum = 0;
    std::size_t count = 0;
    for (std::size_t start = 0; start < tr.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      std::size_t end = std::min(tr.size(), start + static_cast<std::size_t>(config.batch_size));
      Mlp::Gradients g = mlp.zero_grad();
      for (std::size_t i = start; i < end; ++i) {
        const Sample& s = dataset[tr[i]];
        loss_sum += mlp.accumulate(s.x, s.label, g);
        ++count;
      }
      mlp.sgd_step(g, config.learning_rate, 1.0 / static_cast<double>(end - start));
    }
    EpochMetrics m;
    m.train_loss = count ? loss_sum / static_cast<double>(count) : 0.0;
    double vloss = 0;
    int hits = 0;
    for (std::size_t i : val) {
      vloss += mlp.loss(dataset[i].x, dataset[i].label);
      hits += mlp.predict(dataset[i].x) == dataset[i].label ? 1 : 0;
    }
    m.val_loss = vloss / static_cast<double>(val.size());
    m.val_accuracy = static_cast<double>(hits) / static_cast<double>(val.size());
    history.push_back(m);
  }
  return history;
}

}  // namespace rae
