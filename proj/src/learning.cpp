#include "learning.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>
#include <string>

#include "error.hpp"
#include "rng.hpp"

namespace peerfl {

std::size_t ModelShape::param_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < layer_dims.size(); ++i)
    n += static_cast<std::size_t>(layer_dims[i]) * layer_dims[i + 1] + layer_dims[i + 1];
  return n;
}

void ModelShape::check() const {
  if (layer_dims.size() < 2) throw std::invalid_argument("model shape needs at least input and class dims");
  for (int d : layer_dims)
    if (d <= 0) throw std::invalid_argument("model layer dims must be positive");
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.rows = indices.size();
  out.cols = cols;
  out.classes = classes;
  out.features.reserve(indices.size() * cols);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    auto r = row(i);
    out.features.insert(out.features.end(), r.begin(), r.end());
    out.labels.push_back(labels[i]);
  }
  return out;
}

void Dataset::check() const {
  if (rows == 0) throw std::invalid_argument("dataset has no rows");
  if (classes <= 0) throw std::invalid_argument("dataset needs a positive class count");
  if (features.size() != rows * cols || labels.size() != rows)
    throw std::invalid_argument("dataset storage does not match its dimensions");
  for (int y : labels)
    if (y < 0 || y >= classes) throw std::invalid_argument("label out of range: " + std::to_string(y));
  for (double v : features)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
}

namespace {

struct LayerView {
  std::size_t in = 0, out = 0;
  std::size_t w_offset = 0, b_offset = 0;
};

std::vector<LayerView> layer_views(const ModelShape& shape) {
  std::vector<LayerView> views;
  std::size_t off = 0;
  for (std::size_t l = 0; l < shape.layers(); ++l) {
    LayerView v;
    v.in = static_cast<std::size_t>(shape.layer_dims[l]);
    v.out = static_cast<std::size_t>(shape.layer_dims[l + 1]);
    v.w_offset = off;
    v.b_offset = off + v.in * v.out;
    off = v.b_offset + v.out;
    views.push_back(v);
  }
  return views;
}

struct Forward {
  std::vector<LayerView> views;
  // acts[0] is the input; acts[l+1] is the output of layer l (ReLU for
  // hidden layers, raw logits for the last one).
  std::vector<std::vector<double>> acts;
  std::vector<double> probs;
  std::size_t rows = 0;
};

void check_inputs(const ModelParams& params, std::span<const double> features, std::size_t rows) {
  if (rows == 0) throw std::invalid_argument("batch must be non-empty");
  if (params.weights.size() != params.shape.param_count())
    throw std::invalid_argument("weight vector length does not match model shape");
  if (features.size() != rows * static_cast<std::size_t>(params.shape.inputs()))
    throw std::invalid_argument("feature width does not match model input dim");
}

Forward forward(const ModelParams& params, std::span<const double> features, std::size_t rows) {
  Forward f;
  f.rows = rows;
  f.views = layer_views(params.shape);
  f.acts.emplace_back(features.begin(), features.end());
  const auto& w = params.weights;
  for (std::size_t l = 0; l < f.views.size(); ++l) {
    const auto& v = f.views[l];
    const auto& x = f.acts[l];
    std::vector<double> z(rows * v.out);
    for (std::size_t r = 0; r < rows; ++r) {
      double* zr = z.data() + r * v.out;
      for (std::size_t j = 0; j < v.out; ++j) zr[j] = w[v.b_offset + j];
      for (std::size_t i = 0; i < v.in; ++i) {
        const double xi = x[r * v.in + i];
        if (xi == 0.0) continue;
        const double* wi = w.data() + v.w_offset + i * v.out;
        for (std::size_t j = 0; j < v.out; ++j) zr[j] += xi * wi[j];
      }
    }
    for (double zv : z)
      if (!std::isfinite(zv)) throw NumericError("non-finite activation in forward pass", static_cast<int>(l));
    if (l + 1 < f.views.size())
      for (double& zv : z) zv = std::max(zv, 0.0);
    f.acts.push_back(std::move(z));
  }

  const std::size_t classes = f.views.back().out;
  const auto& logits = f.acts.back();
  f.probs.resize(rows * classes);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* zr = logits.data() + r * classes;
    double* pr = f.probs.data() + r * classes;
    const double mx = *std::max_element(zr, zr + classes);
    double sum = 0.0;
    for (std::size_t j = 0; j < classes; ++j) sum += (pr[j] = std::exp(zr[j] - mx));
    for (std::size_t j = 0; j < classes; ++j) pr[j] /= sum;
  }
  return f;
}

double row_loss(const Forward& f, std::size_t r, int label) {
  const std::size_t classes = f.views.back().out;
  const double* zr = f.acts.back().data() + r * classes;
  const double mx = *std::max_element(zr, zr + classes);
  double sum = 0.0;
  for (std::size_t j = 0; j < classes; ++j) sum += std::exp(zr[j] - mx);
  return mx + std::log(sum) - zr[label];
}

void check_labels(std::span<const int> labels, int classes) {
  for (int y : labels)
    if (y < 0 || y >= classes) throw std::invalid_argument("label out of range: " + std::to_string(y));
}

// Back-propagates `delta` (dLoss/dlogits, rows x classes) through every
// layer. Accumulates parameter gradients into `grad` when non-null and
// returns dLoss/dinput.
std::vector<double> backward(const ModelParams& params, const Forward& f, std::vector<double> delta,
                             std::vector<double>* grad) {
  const auto& w = params.weights;
  const std::size_t rows = f.rows;
  for (std::size_t l = f.views.size(); l-- > 0;) {
    const auto& v = f.views[l];
    const auto& x = f.acts[l];
    if (grad) {
      auto& g = *grad;
      for (std::size_t r = 0; r < rows; ++r) {
        const double* dr = delta.data() + r * v.out;
        for (std::size_t i = 0; i < v.in; ++i) {
          const double xi = x[r * v.in + i];
          if (xi == 0.0) continue;
          double* gi = g.data() + v.w_offset + i * v.out;
          for (std::size_t j = 0; j < v.out; ++j) gi[j] += xi * dr[j];
        }
        for (std::size_t j = 0; j < v.out; ++j) g[v.b_offset + j] += dr[j];
      }
    }
    std::vector<double> prev(rows * v.in, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* dr = delta.data() + r * v.out;
      for (std::size_t i = 0; i < v.in; ++i) {
        const double* wi = w.data() + v.w_offset + i * v.out;
        double s = 0.0;
        for (std::size_t j = 0; j < v.out; ++j) s += wi[j] * dr[j];
        // ReLU mask of the layer below; the stored activation is zero
        // exactly where the pre-activation was non-positive.
        prev[r * v.in + i] = (l == 0 || x[r * v.in + i] > 0.0) ? s : 0.0;
      }
    }
    delta = std::move(prev);
  }
  return delta;
}

std::vector<double> output_delta(const Forward& f, std::span<const int> labels, double scale) {
  const std::size_t classes = f.views.back().out;
  std::vector<double> delta(f.probs);
  for (std::size_t r = 0; r < f.rows; ++r) delta[r * classes + labels[r]] -= 1.0;
  if (scale != 1.0)
    for (double& d : delta) d *= scale;
  return delta;
}

}  // namespace

ModelParams init_model(const ModelShape& shape, std::uint64_t seed) {
  shape.check();
  ModelParams p{shape, std::vector<double>(shape.param_count(), 0.0)};
  Rng rng(seed);
  for (const auto& v : layer_views(shape)) {
    const double limit = std::sqrt(6.0 / static_cast<double>(v.in + v.out));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (std::size_t k = 0; k < v.in * v.out; ++k) p.weights[v.w_offset + k] = u(rng);
  }
  return p;
}

LossGrad loss_and_grad(const ModelParams& params, std::span<const double> features, std::span<const int> labels) {
  const std::size_t rows = labels.size();
  check_inputs(params, features, rows);
  check_labels(labels, params.shape.classes());
  const Forward f = forward(params, features, rows);
  LossGrad out;
  for (std::size_t r = 0; r < rows; ++r) out.loss += row_loss(f, r, labels[r]);
  out.loss /= static_cast<double>(rows);
  out.grad.assign(params.weights.size(), 0.0);
  backward(params, f, output_delta(f, labels, 1.0 / static_cast<double>(rows)), &out.grad);
  return out;
}

std::vector<double> input_gradient(const ModelParams& params, std::span<const double> features,
                                   std::span<const int> labels) {
  const std::size_t rows = labels.size();
  check_inputs(params, features, rows);
  check_labels(labels, params.shape.classes());
  const Forward f = forward(params, features, rows);
  return backward(params, f, output_delta(f, labels, 1.0), nullptr);
}

std::vector<double> predict_proba(const ModelParams& params, std::span<const double> features) {
  const std::size_t rows = features.size() / static_cast<std::size_t>(params.shape.inputs());
  check_inputs(params, features, rows);
  return forward(params, features, rows).probs;
}

EvalMetrics evaluate(const ModelParams& params, const Dataset& data) {
  check_inputs(params, data.features, data.rows);
  const Forward f = forward(params, data.features, data.rows);
  const std::size_t classes = f.views.back().out;
  EvalMetrics m;
  std::size_t correct = 0;
  for (std::size_t r = 0; r < data.rows; ++r) {
    m.loss += row_loss(f, r, data.labels[r]);
    const double* zr = f.acts.back().data() + r * classes;
    const auto pred = static_cast<int>(std::max_element(zr, zr + classes) - zr);
    if (pred == data.labels[r]) ++correct;
  }
  m.loss /= static_cast<double>(data.rows);
  m.accuracy = static_cast<double>(correct) / static_cast<double>(data.rows);
  return m;
}

TrainResult train(ModelParams params, const Dataset& data, const TrainConfig& cfg) {
  if (cfg.epochs <= 0) throw std::invalid_argument("epochs must be positive");
  if (cfg.batch_size <= 0) throw std::invalid_argument("batch size must be positive");
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate))
    throw std::invalid_argument("learning rate must be finite and positive");
  check_inputs(params, data.features, data.rows);

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(data.rows);
  std::vector<double> bx;
  std::vector<int> by;
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  for (int e = 0; e < cfg.epochs; ++e) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < data.rows; start += batch) {
      const std::size_t end = std::min(start + batch, data.rows);
      bx.clear();
      by.clear();
      for (std::size_t k = start; k < end; ++k) {
        auto r = data.row(order[k]);
        bx.insert(bx.end(), r.begin(), r.end());
        by.push_back(data.labels[order[k]]);
      }
      const LossGrad lg = loss_and_grad(params, bx, by);
      for (std::size_t k = 0; k < params.weights.size(); ++k) params.weights[k] -= cfg.learning_rate * lg.grad[k];
    }
  }
  TrainResult out{std::move(params), {}};
  out.metrics = evaluate(out.params, data);
  return out;
}

// --- serialization ----------------------------------------------------------

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

void put_f64(std::vector<std::uint8_t>& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * k);
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * k);
    return std::bit_cast<double>(v);
  }
  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size())
      throw FormatError("truncated model payload at byte " + std::to_string(pos_));
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

// Tensor boundaries (W1, b1, W2, b2, ...) as [begin, end) offsets.
std::vector<std::pair<std::size_t, std::size_t>> tensors(const ModelShape& shape) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& v : layer_views(shape)) {
    out.emplace_back(v.w_offset, v.b_offset);
    out.emplace_back(v.b_offset, v.b_offset + v.out);
  }
  return out;
}

}  // namespace

std::vector<std::uint8_t> serialize(const ModelParams& params, Compression compression) {
  const auto& dims = params.shape.layer_dims;
  std::vector<std::uint8_t> out;
  put_u32(out, static_cast<std::uint32_t>(dims.size()));
  for (int d : dims) put_u32(out, static_cast<std::uint32_t>(d));

  if (compression == Compression::None) {
    out.reserve(out.size() + 8 * params.weights.size());
    for (double w : params.weights) put_f64(out, w);
    return out;
  }
  for (const auto& [begin, end] : tensors(params.shape)) {
    const auto first = params.weights.begin() + static_cast<std::ptrdiff_t>(begin);
    const auto last = params.weights.begin() + static_cast<std::ptrdiff_t>(end);
    const auto [mn, mx] = std::minmax_element(first, last);
    const double lo = *mn, hi = *mx;
    put_f64(out, lo);
    put_f64(out, hi);
    const double range = hi - lo;
    for (auto it = first; it != last; ++it) {
      const double code = range > 0.0 ? std::round((*it - lo) / range * 255.0) : 0.0;
      out.push_back(static_cast<std::uint8_t>(std::clamp(code, 0.0, 255.0)));
    }
  }
  return out;
}

ModelParams deserialize(std::span<const std::uint8_t> bytes, const ModelShape& shape, Compression compression) {
  Reader in(bytes);
  const std::uint32_t count = in.u32();
  if (count != shape.layer_dims.size())
    throw FormatError("shape mismatch: payload has " + std::to_string(count) + " dims, expected " +
                      std::to_string(shape.layer_dims.size()));
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t d = in.u32();
    if (d != static_cast<std::uint32_t>(shape.layer_dims[i]))
      throw FormatError("shape mismatch at dim " + std::to_string(i) + ": payload " + std::to_string(d) +
                        ", expected " + std::to_string(shape.layer_dims[i]));
  }
  ModelParams p{shape, std::vector<double>(shape.param_count())};
  if (compression == Compression::None) {
    for (double& w : p.weights) w = in.f64();
  } else {
    for (const auto& [begin, end] : tensors(shape)) {
      const double lo = in.f64();
      const double hi = in.f64();
      const double step = (hi - lo) / 255.0;
      for (std::size_t k = begin; k < end; ++k) p.weights[k] = lo + static_cast<double>(in.u8()) * step;
    }
  }
  if (!in.done()) throw FormatError("trailing bytes after model payload");
  for (double w : p.weights)
    if (!std::isfinite(w)) throw FormatError("non-finite weight in model payload");
  return p;
}

}  // namespace peerfl
