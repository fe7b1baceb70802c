// Copyright 2026 The mentionlink Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MLINK_ENCODER_H_
#define MLINK_ENCODER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlink/corpus.h"

namespace mlink {

// Unit-norm mention embedding.
using Embedding = std::vector<float>;

// Dense row-major matrix of doubles.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c) {}

  std::span<double> row(int i) {
    return {data.data() + static_cast<size_t>(i) * cols, static_cast<size_t>(cols)};
  }
  std::span<const double> row(int i) const {
    return {data.data() + static_cast<size_t>(i) * cols, static_cast<size_t>(cols)};
  }
  double &at(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
  double at(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }

  bool operator==(const Matrix &) const = default;
};

struct EncoderConfig {
  int32_t vocab_size = 16384;
  int embedding_dim = 64;
  int hidden_dim = 128;
  int output_dim = 300;
  double initial_temperature = 0.05;
  double min_temperature = 0.01;
  double max_temperature = 1.0;
};

// All trainable weights. The same layout doubles as a gradient container.
//
// encode(x) = normalize(W2 · tanh(W1 · mean_t(tok[x_t] + type[y_t]) + b1) + b2)
struct EncoderParams {
  Matrix token_embeddings;  // vocab_size x embedding_dim
  Matrix type_embeddings;   // 2 x embedding_dim
  Matrix hidden_weights;    // embedding_dim x hidden_dim
  std::vector<double> hidden_bias;
  Matrix output_weights;    // hidden_dim x output_dim
  std::vector<double> output_bias;
  // Logits are scores divided by this value.
  double temperature = 1.0;

  int32_t vocab_size() const { return token_embeddings.rows; }
  int embedding_dim() const { return token_embeddings.cols; }
  int hidden_dim() const { return hidden_weights.cols; }
  int output_dim() const { return output_weights.cols; }

  // Zero-filled tensors with the given shape (temperature = 0).
  static EncoderParams Zeros(int32_t vocab_size, int embedding_dim,
                             int hidden_dim, int output_dim);
  EncoderParams ZerosLike() const;

  // Visits every tensor in checkpoint order. Temperature comes last as a
  // one-element span. `decayed` is true for tensors that take weight decay.
  void ForEachTensor(
      const std::function<void(std::string_view name, std::span<double> values,
                               bool decayed)> &fn);
  void ForEachTensor(
      const std::function<void(std::string_view name,
                               std::span<const double> values, bool decayed)>
          &fn) const;

  size_t NumValues() const;
  bool AllFinite() const;
  // Throws ErrorKind::kInvalidArgument on inconsistent shapes or temperature.
  void Validate() const;

  bool operator==(const EncoderParams &) const = default;
};

// Token/type embeddings ~ N(0, 0.02^2); MLP weights Xavier-uniform; biases 0.
EncoderParams InitializeParams(const EncoderConfig &config, uint64_t seed);

// Intermediate values of one forward pass, kept for backpropagation.
struct ForwardState {
  std::vector<double> pooled;
  std::vector<double> hidden;
  std::vector<double> output;  // unit-norm
  double pre_norm = 0.0;
  int active_tokens = 0;
};

ForwardState Forward(const EncoderParams &params, const FeaturizedMention &fm);

// Accumulates into `grads` the parameter gradient given dLoss/dOutput.
void Backward(const EncoderParams &params, const FeaturizedMention &fm,
              const ForwardState &state, std::span<const double> d_output,
              EncoderParams &grads);

Embedding Encode(const EncoderParams &params, const FeaturizedMention &fm);

// Encodes many inputs in parallel; result order matches input order.
std::vector<Embedding> EncodeAll(const EncoderParams &params,
                                 std::span<const FeaturizedMention> inputs);

// Dot product of unit vectors (cosine). Throws on dimension mismatch.
float Score(std::span<const float> a, std::span<const float> b);

// ---------------------------------------------------------------------------
// Losses.

// Loss heads over already-computed embeddings. Gradients are with respect
// to the embeddings and the temperature.
struct HeadResult {
  double loss = 0.0;
  std::vector<std::vector<double>> d_queries;
  std::vector<std::vector<double>> d_positives;
  std::vector<std::vector<std::vector<double>>> d_negatives;
  double d_temperature = 0.0;
  int queries_without_negatives = 0;
};

// Row i of logits is q_i . p_j / temperature; target is j = i.
HeadResult InBatchSoftmaxHead(const std::vector<std::vector<double>> &queries,
                              const std::vector<std::vector<double>> &positives,
                              double temperature);

// Query i is scored against {p_i} plus its own negatives; target is p_i.
// Queries without negatives add zero but still count in the mean.
HeadResult HardNegativeHead(
    const std::vector<std::vector<double>> &queries,
    const std::vector<std::vector<double>> &positives,
    const std::vector<std::vector<std::vector<double>>> &negatives,
    double temperature);

struct TrainBatch {
  std::vector<FeaturizedMention> queries;
  std::vector<FeaturizedMention> positives;
  // Either empty or aligned with queries.
  std::vector<std::vector<FeaturizedMention>> hard_negatives;
};

struct LossAndGradients {
  double loss = 0.0;
  double inbatch_loss = 0.0;
  double hard_negative_loss = 0.0;
  EncoderParams gradients;
};

LossAndGradients InBatchLoss(const EncoderParams &params,
                             const TrainBatch &batch);
LossAndGradients HardNegativeLoss(const EncoderParams &params,
                                  const TrainBatch &batch);
// inbatch + hard_negative_weight * hard-negative loss. The hard-negative term
// is skipped when the batch carries no negatives.
LossAndGradients TrainingLoss(const EncoderParams &params,
                              const TrainBatch &batch,
                              double hard_negative_weight);

// ---------------------------------------------------------------------------
// Optimization.

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
};

// Adam with decoupled weight decay. Biases and temperature are not decayed.
class AdamW {
 public:
  AdamW(const EncoderParams &shape, const AdamOptions &options);

  void Step(EncoderParams &params, const EncoderParams &grads,
            double learning_rate);

  int64_t steps() const { return steps_; }

 private:
  AdamOptions options_;
  EncoderParams first_moment_;
  EncoderParams second_moment_;
  int64_t steps_ = 0;
};

struct TrainConfig {
  int batch_size = 256;
  int steps = 2000;
  double learning_rate = 1e-3;
  uint64_t seed = 0;
  AdamOptions adam;
  double warmup_fraction = 0.1;
  double hard_negative_weight = 1.0;
  double min_temperature = 0.01;
  double max_temperature = 1.0;
  // Log every this many steps; 0 disables progress logs.
  int log_every = 0;
};

// Featurized mentions plus example triples that index into them.
struct TrainingSet {
  std::vector<FeaturizedMention> mentions;
  struct Example {
    int32_t query = 0;
    int32_t positive = 0;
    std::vector<int32_t> negatives;
  };
  std::vector<Example> examples;
};

struct TrainResult {
  EncoderParams params;
  std::vector<double> loss_curve;
};

// Deterministic for a fixed seed. Throws ErrorKind::kNumerical if the loss
// becomes non-finite, naming the step.
TrainResult Train(EncoderParams params, const TrainingSet &data,
                  const TrainConfig &config);

// Learning rate after `step` completed steps: linear warmup, then constant.
double ScheduledLearningRate(const TrainConfig &config, int step);

// ---------------------------------------------------------------------------
// Checkpoints: "MLMN", u32 version, u32 vocab, u32 d_emb, u32 d_hidden,
// u32 d, then float32 tensors in ForEachTensor order, temperature last.

inline constexpr uint32_t kCheckpointVersion = 1;

std::string SerializeCheckpoint(const EncoderParams &params);
EncoderParams ParseCheckpoint(std::string_view bytes, std::string_view source);
void SaveCheckpoint(const EncoderParams &params,
                    const std::filesystem::path &path);
EncoderParams LoadCheckpoint(const std::filesystem::path &path);

}  // namespace mlink

#endif  // MLINK_ENCODER_H_
