#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ricguard/error.hpp"
#include "ricguard/kpm_detector.hpp"

namespace ricguard {

namespace {

constexpr std::size_t kI = SequenceModel::kInputs;
constexpr std::size_t kT = kSequenceLength;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Views into the flat parameter vector.
struct Layout {
  std::size_t H;
  std::size_t W() const { return 0; }
  std::size_t U() const { return 4 * H * kI; }
  std::size_t b() const { return U() + 4 * H * H; }
  std::size_t V() const { return b() + 4 * H; }
  std::size_t c() const { return V() + kI * H; }
  std::size_t total() const { return c() + kI; }
};

// Activations of one forward pass, kept for backpropagation.
struct Trace {
  explicit Trace(std::size_t H)
      : gates(kT * 4 * H), cell(kT * H), cell_tanh(kT * H), hidden((kT + 1) * H, 0.0) {}
  std::vector<double> gates;      // post-activation i, f, g, o per step
  std::vector<double> cell;       // c_t
  std::vector<double> cell_tanh;  // tanh(c_t)
  std::vector<double> hidden;     // h_0 .. h_T, h_0 = 0
};

FeatureVector forward(const Layout& L, const double* p, const SequenceWindow& w, Trace& tr) {
  const std::size_t H = L.H;
  const double* W = p + L.W();
  const double* U = p + L.U();
  const double* b = p + L.b();
  std::vector<double> z(4 * H);
  for (std::size_t t = 0; t < kT; ++t) {
    const auto& x = w.inputs[t];
    const double* h_prev = &tr.hidden[t * H];
    for (std::size_t r = 0; r < 4 * H; ++r) {
      double acc = b[r];
      const double* wr = W + r * kI;
      for (std::size_t k = 0; k < kI; ++k) acc += wr[k] * x[k];
      const double* ur = U + r * H;
      for (std::size_t k = 0; k < H; ++k) acc += ur[k] * h_prev[k];
      z[r] = acc;
    }
    double* g = &tr.gates[t * 4 * H];
    for (std::size_t j = 0; j < H; ++j) {
      g[j] = sigmoid(z[j]);
      g[H + j] = sigmoid(z[H + j]);
      g[2 * H + j] = std::tanh(z[2 * H + j]);
      g[3 * H + j] = sigmoid(z[3 * H + j]);
    }
    const double* c_prev = t == 0 ? nullptr : &tr.cell[(t - 1) * H];
    double* c = &tr.cell[t * H];
    double* ct = &tr.cell_tanh[t * H];
    double* h = &tr.hidden[(t + 1) * H];
    for (std::size_t j = 0; j < H; ++j) {
      c[j] = g[H + j] * (c_prev ? c_prev[j] : 0.0) + g[j] * g[2 * H + j];
      ct[j] = std::tanh(c[j]);
      h[j] = g[3 * H + j] * ct[j];
    }
  }
  const double* V = p + L.V();
  const double* cb = p + L.c();
  const double* hT = &tr.hidden[kT * H];
  FeatureVector pred;
  for (std::size_t k = 0; k < kI; ++k) {
    double acc = cb[k] + w.inputs[kT - 1][k];
    for (std::size_t j = 0; j < H; ++j) acc += V[k * H + j] * hT[j];
    pred[k] = acc;
  }
  return pred;
}

double window_error(const FeatureVector& pred, const FeatureVector& target) {
  double e = 0.0;
  for (std::size_t k = 0; k < kI; ++k) e += (pred[k] - target[k]) * (pred[k] - target[k]);
  return e / static_cast<double>(kI);
}

// Accumulates the gradient of scale * window_error into grad.
void backward(const Layout& L, const double* p, const SequenceWindow& w, const Trace& tr, const FeatureVector& pred,
              double scale, double* grad) {
  const std::size_t H = L.H;
  const double* U = p + L.U();
  const double* V = p + L.V();

  FeatureVector dpred;
  for (std::size_t k = 0; k < kI; ++k) dpred[k] = scale * 2.0 * (pred[k] - w.target[k]) / static_cast<double>(kI);

  std::vector<double> dh(H, 0.0), dc(H, 0.0), dz(4 * H), dh_prev(H);
  const double* hT = &tr.hidden[kT * H];
  double* gV = grad + L.V();
  double* gc = grad + L.c();
  for (std::size_t k = 0; k < kI; ++k) {
    gc[k] += dpred[k];
    for (std::size_t j = 0; j < H; ++j) {
      gV[k * H + j] += dpred[k] * hT[j];
      dh[j] += V[k * H + j] * dpred[k];
    }
  }

  double* gW = grad + L.W();
  double* gU = grad + L.U();
  double* gb = grad + L.b();
  for (std::size_t t = kT; t-- > 0;) {
    const double* g = &tr.gates[t * 4 * H];
    const double* ct = &tr.cell_tanh[t * H];
    const double* c_prev = t == 0 ? nullptr : &tr.cell[(t - 1) * H];
    for (std::size_t j = 0; j < H; ++j) {
      const double i = g[j], f = g[H + j], gg = g[2 * H + j], o = g[3 * H + j];
      const double d_o = dh[j] * ct[j];
      const double d_c = dc[j] + dh[j] * o * (1.0 - ct[j] * ct[j]);
      const double cp = c_prev ? c_prev[j] : 0.0;
      dz[j] = d_c * gg * i * (1.0 - i);
      dz[H + j] = d_c * cp * f * (1.0 - f);
      dz[2 * H + j] = d_c * i * (1.0 - gg * gg);
      dz[3 * H + j] = d_o * o * (1.0 - o);
      dc[j] = d_c * f;
    }
    const auto& x = w.inputs[t];
    const double* h_prev = &tr.hidden[t * H];
    std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
    for (std::size_t r = 0; r < 4 * H; ++r) {
      const double d = dz[r];
      gb[r] += d;
      double* gwr = gW + r * kI;
      for (std::size_t k = 0; k < kI; ++k) gwr[k] += d * x[k];
      double* gur = gU + r * H;
      const double* ur = U + r * H;
      for (std::size_t k = 0; k < H; ++k) {
        gur[k] += d * h_prev[k];
        dh_prev[k] += ur[k] * d;
      }
    }
    dh.swap(dh_prev);
  }
}

}  // namespace

SequenceModel::SequenceModel(std::size_t hidden_size, std::uint64_t seed) : hidden_(hidden_size) {
  if (hidden_size == 0) throw Error(Errc::contract, "hidden_size must be positive");
  const Layout L{hidden_};
  params_.assign(L.total(), 0.0);
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_));
  std::uniform_real_distribution<double> recurrent(-bound, bound);
  for (std::size_t i = L.W(); i < L.b(); ++i) params_[i] = recurrent(rng);
  for (std::size_t j = 0; j < hidden_; ++j) params_[L.b() + hidden_ + j] = 1.0;  // forget-gate bias
  std::uniform_real_distribution<double> readout(-0.1 * bound, 0.1 * bound);
  for (std::size_t i = L.V(); i < L.c(); ++i) params_[i] = readout(rng);
}

void SequenceModel::set_parameters(std::span<const double> values) {
  if (values.size() != params_.size()) throw Error(Errc::contract, "parameter count mismatch");
  for (double v : values)
    if (!std::isfinite(v)) throw Error(Errc::contract, "non-finite model parameter");
  std::copy(values.begin(), values.end(), params_.begin());
}

FeatureVector SequenceModel::predict(const SequenceWindow& window) const {
  const Layout L{hidden_};
  Trace tr(hidden_);
  return forward(L, params_.data(), window, tr);
}

double SequenceModel::loss(std::span<const SequenceWindow> windows) const {
  if (windows.empty()) return 0.0;
  const Layout L{hidden_};
  Trace tr(hidden_);
  double total = 0.0;
  for (const auto& w : windows) total += window_error(forward(L, params_.data(), w, tr), w.target);
  return total / static_cast<double>(windows.size());
}

double SequenceModel::loss_and_gradient(std::span<const SequenceWindow> windows, std::vector<double>& gradient) const {
  gradient.assign(params_.size(), 0.0);
  if (windows.empty()) return 0.0;
  const Layout L{hidden_};
  Trace tr(hidden_);
  const double scale = 1.0 / static_cast<double>(windows.size());
  double total = 0.0;
  for (const auto& w : windows) {
    const auto pred = forward(L, params_.data(), w, tr);
    total += window_error(pred, w.target);
    backward(L, params_.data(), w, tr, pred, scale, gradient.data());
  }
  return total * scale;
}

std::size_t SequenceModel::macs_per_forecast() const noexcept {
  return kT * 4 * hidden_ * (kI + hidden_) + kI * hidden_;
}

SequenceModel train_model(std::span<const SequenceWindow> windows, const TrainingConfig& config,
                          TrainingReport* report) {
  if (windows.empty()) throw Error(Errc::contract, "no training windows");
  SequenceModel model(config.hidden_size, config.rng_seed);
  std::mt19937_64 rng(config.rng_seed ^ 0x9e3779b97f4a7c15ULL);

  const std::size_t n = windows.size();
  const std::size_t batch = config.batch_size == 0 ? n : std::min(config.batch_size, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  auto params = model.parameters();
  std::vector<double> m(params.size(), 0.0), v(params.size(), 0.0), grad;
  std::vector<SequenceWindow> minibatch;
  minibatch.reserve(batch);
  std::uint64_t step = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += batch) {
      minibatch.clear();
      for (std::size_t i = start; i < std::min(start + batch, n); ++i) minibatch.push_back(windows[order[i]]);
      const double loss = model.loss_and_gradient(minibatch, grad);
      if (!std::isfinite(loss))
        throw Error(Errc::training, "non-finite training loss at epoch " + std::to_string(epoch) +
                                        "; check the learning rate");
      epoch_loss += loss;
      ++batches;

      ++step;
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      for (std::size_t i = 0; i < params.size(); ++i) {
        m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * grad[i];
        v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
        params[i] -= config.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + kEps);
      }
    }
    if (report) report->epoch_loss.push_back(epoch_loss / static_cast<double>(batches));
  }
  return model;
}

}  // namespace ricguard
