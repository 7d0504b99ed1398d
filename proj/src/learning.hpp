#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace peerfl {

/// Layer widths: input, optional hidden layer(s), classes. Hidden layers use
/// ReLU; the output layer is softmax.
struct ModelShape {
  std::vector<int> layer_dims;

  std::size_t layers() const { return layer_dims.size() - 1; }
  int inputs() const { return layer_dims.front(); }
  int classes() const { return layer_dims.back(); }
  std::size_t param_count() const;
  /// Throws std::invalid_argument unless there are >= 2 positive dims.
  void check() const;

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

/// Flat weights in layer-major order: W1 (in x out, row-major), b1, W2, b2, ...
struct ModelParams {
  ModelShape shape;
  std::vector<double> weights;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Row-major feature matrix with integer labels.
struct Dataset {
  std::size_t rows = 0;
  std::size_t cols = 0;
  int classes = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::span<const double> row(std::size_t i) const { return {features.data() + i * cols, cols}; }
  /// Rows selected by `indices`, in that order.
  Dataset subset(std::span<const std::size_t> indices) const;
  /// Throws std::invalid_argument on empty data, bad labels, or non-finite features.
  void check() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct TrainConfig {
  int epochs = 1;
  int batch_size = 32;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
};

struct EvalMetrics {
  double loss = 0.0;      // mean cross-entropy, nats
  double accuracy = 0.0;  // fraction
  friend bool operator==(const EvalMetrics&, const EvalMetrics&) = default;
};

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;  // aligned with ModelParams::weights
};

ModelParams init_model(const ModelShape& shape, std::uint64_t seed);

/// Mean cross-entropy over the batch and its exact gradient.
/// Throws NumericError when a forward pass produces NaN/Inf.
LossGrad loss_and_grad(const ModelParams& params, std::span<const double> features,
                       std::span<const int> labels);

/// Gradient of each row's own cross-entropy with respect to its inputs
/// (rows x inputs, row-major).
std::vector<double> input_gradient(const ModelParams& params, std::span<const double> features,
                                   std::span<const int> labels);

/// Class probabilities (rows x classes, row-major).
std::vector<double> predict_proba(const ModelParams& params, std::span<const double> features);

EvalMetrics evaluate(const ModelParams& params, const Dataset& data);

struct TrainResult {
  ModelParams params;
  EvalMetrics metrics;  // of the returned params on the training data
};

/// Mini-batch SGD with a seeded shuffle per epoch; a trailing short batch is kept.
TrainResult train(ModelParams params, const Dataset& data, const TrainConfig& cfg);

enum class Compression { None, Quantized8 };

/// Wire format: u32 layer-dim count, u32 dims, then the payload; all little-endian.
/// None: f64 weights. Quantized8: per tensor (W_i then b_i) f64 min, f64 max, u8 codes.
std::vector<std::uint8_t> serialize(const ModelParams& params, Compression compression);

/// Throws FormatError on shape mismatch, truncation, or trailing bytes.
ModelParams deserialize(std::span<const std::uint8_t> bytes, const ModelShape& shape,
                        Compression compression);

}  // namespace peerfl
