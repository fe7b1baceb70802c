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

#include "mlink/encoder.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "mlink/binary_io.h"
#include "mlink/errors.h"
#include "mlink/parallel.h"
#include "mlink/rng.h"

namespace mlink {
namespace {

std::span<double> AsSpan(Matrix &m) { return m.data; }
std::span<const double> AsSpan(const Matrix &m) { return m.data; }

double Dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

// Numerically stable log-sum-exp and softmax of one logit row.
double LogSumExp(std::span<const double> logits) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - peak);
  return peak + std::log(sum);
}

}  // namespace

// ---------------------------------------------------------------------------
// EncoderParams

EncoderParams EncoderParams::Zeros(int32_t vocab_size, int embedding_dim,
                                   int hidden_dim, int output_dim) {
  EncoderParams p;
  p.token_embeddings = Matrix(vocab_size, embedding_dim);
  p.type_embeddings = Matrix(2, embedding_dim);
  p.hidden_weights = Matrix(embedding_dim, hidden_dim);
  p.hidden_bias.assign(hidden_dim, 0.0);
  p.output_weights = Matrix(hidden_dim, output_dim);
  p.output_bias.assign(output_dim, 0.0);
  p.temperature = 0.0;
  return p;
}

EncoderParams EncoderParams::ZerosLike() const {
  return Zeros(vocab_size(), embedding_dim(), hidden_dim(), output_dim());
}

void EncoderParams::ForEachTensor(
    const std::function<void(std::string_view, std::span<double>, bool)> &fn) {
  fn("token_embeddings", AsSpan(token_embeddings), true);
  fn("type_embeddings", AsSpan(type_embeddings), true);
  fn("hidden_weights", AsSpan(hidden_weights), true);
  fn("hidden_bias", hidden_bias, false);
  fn("output_weights", AsSpan(output_weights), true);
  fn("output_bias", output_bias, false);
  fn("temperature", std::span<double>(&temperature, 1), false);
}

void EncoderParams::ForEachTensor(
    const std::function<void(std::string_view, std::span<const double>, bool)>
        &fn) const {
  fn("token_embeddings", AsSpan(token_embeddings), true);
  fn("type_embeddings", AsSpan(type_embeddings), true);
  fn("hidden_weights", AsSpan(hidden_weights), true);
  fn("hidden_bias", hidden_bias, false);
  fn("output_weights", AsSpan(output_weights), true);
  fn("output_bias", output_bias, false);
  fn("temperature", std::span<const double>(&temperature, 1), false);
}

size_t EncoderParams::NumValues() const {
  size_t n = 0;
  ForEachTensor([&](std::string_view, std::span<const double> v, bool) {
    n += v.size();
  });
  return n;
}

bool EncoderParams::AllFinite() const {
  bool finite = true;
  ForEachTensor([&](std::string_view, std::span<const double> v, bool) {
    for (double x : v) finite = finite && std::isfinite(x);
  });
  return finite;
}

void EncoderParams::Validate() const {
  const int e = embedding_dim();
  const int h = hidden_dim();
  Require(vocab_size() > kNumReservedIds && e > 0 && h > 0 && output_dim() > 0,
          "encoder dimensions must be positive");
  Require(type_embeddings.rows == 2 && type_embeddings.cols == e,
          "type_embeddings shape mismatch");
  Require(hidden_weights.rows == e, "hidden_weights shape mismatch");
  Require(static_cast<int>(hidden_bias.size()) == h, "hidden_bias size mismatch");
  Require(output_weights.rows == h, "output_weights shape mismatch");
  Require(static_cast<int>(output_bias.size()) == output_dim(),
          "output_bias size mismatch");
  Require(temperature > 0.0 && std::isfinite(temperature),
          "temperature must be positive");
}

EncoderParams InitializeParams(const EncoderConfig &config, uint64_t seed) {
  Require(config.initial_temperature > 0.0, "temperature must be positive");
  EncoderParams p =
      EncoderParams::Zeros(config.vocab_size, config.embedding_dim,
                           config.hidden_dim, config.output_dim);
  Rng rng(seed);
  for (double &x : p.token_embeddings.data) x = rng.Normal(0.0, 0.02);
  for (double &x : p.type_embeddings.data) x = rng.Normal(0.0, 0.02);
  auto xavier = [&](Matrix &m) {
    const double limit = std::sqrt(6.0 / (m.rows + m.cols));
    for (double &x : m.data) x = (2.0 * rng.UniformDouble() - 1.0) * limit;
  };
  xavier(p.hidden_weights);
  xavier(p.output_weights);
  p.temperature = config.initial_temperature;
  p.Validate();
  return p;
}

// ---------------------------------------------------------------------------
// Forward / backward

ForwardState Forward(const EncoderParams &params, const FeaturizedMention &fm) {
  const int e = params.embedding_dim();
  const int h = params.hidden_dim();
  const int d = params.output_dim();
  if (fm.token_ids.size() != fm.type_ids.size()) {
    Fail(ErrorKind::kInvalidArgument, "token_ids and type_ids differ in length");
  }

  ForwardState s;
  s.pooled.assign(e, 0.0);
  for (size_t t = 0; t < fm.token_ids.size(); ++t) {
    const int32_t id = fm.token_ids[t];
    if (id == kPadId) continue;
    if (id < 0 || id >= params.vocab_size()) {
      Fail(ErrorKind::kInvalidArgument,
           "token id " + std::to_string(id) + " outside vocabulary of " +
               std::to_string(params.vocab_size()));
    }
    const int32_t type = fm.type_ids[t];
    if (type != kOrganicType && type != kDescriptionType) {
      Fail(ErrorKind::kInvalidArgument, "type id must be 0 or 1");
    }
    auto tok = params.token_embeddings.row(id);
    auto typ = params.type_embeddings.row(type);
    for (int i = 0; i < e; ++i) s.pooled[i] += tok[i] + typ[i];
    ++s.active_tokens;
  }
  if (s.active_tokens == 0) {
    Fail(ErrorKind::kInvalidArgument, "input has no non-PAD tokens to pool");
  }
  const double inv = 1.0 / s.active_tokens;
  for (double &x : s.pooled) x *= inv;

  s.hidden = params.hidden_bias;
  for (int i = 0; i < e; ++i) Axpy(s.pooled[i], params.hidden_weights.row(i), s.hidden);
  for (double &x : s.hidden) x = std::tanh(x);

  s.output = params.output_bias;
  for (int j = 0; j < h; ++j) Axpy(s.hidden[j], params.output_weights.row(j), s.output);
  s.pre_norm = std::sqrt(Dot(s.output, s.output));
  if (!(s.pre_norm > 0.0) || !std::isfinite(s.pre_norm)) {
    Fail(ErrorKind::kNumerical, "encoder output has zero or non-finite norm");
  }
  for (double &x : s.output) x /= s.pre_norm;
  (void)d;
  return s;
}

void Backward(const EncoderParams &params, const FeaturizedMention &fm,
              const ForwardState &state, std::span<const double> d_output,
              EncoderParams &grads) {
  const int e = params.embedding_dim();
  const int h = params.hidden_dim();
  const int d = params.output_dim();

  // Through the L2 normalization.
  const double radial = Dot(state.output, d_output);
  std::vector<double> dz(d);
  for (int k = 0; k < d; ++k) {
    dz[k] = (d_output[k] - state.output[k] * radial) / state.pre_norm;
  }
  Axpy(1.0, dz, grads.output_bias);
  std::vector<double> da(h);
  for (int j = 0; j < h; ++j) {
    Axpy(state.hidden[j], dz, grads.output_weights.row(j));
    const double dh = Dot(params.output_weights.row(j), dz);
    da[j] = dh * (1.0 - state.hidden[j] * state.hidden[j]);
  }
  Axpy(1.0, da, grads.hidden_bias);
  std::vector<double> dp(e);
  for (int i = 0; i < e; ++i) {
    Axpy(state.pooled[i], da, grads.hidden_weights.row(i));
    dp[i] = Dot(params.hidden_weights.row(i), da) / state.active_tokens;
  }
  for (size_t t = 0; t < fm.token_ids.size(); ++t) {
    if (fm.token_ids[t] == kPadId) continue;
    Axpy(1.0, dp, grads.token_embeddings.row(fm.token_ids[t]));
    Axpy(1.0, dp, grads.type_embeddings.row(fm.type_ids[t]));
  }
}

Embedding Encode(const EncoderParams &params, const FeaturizedMention &fm) {
  const ForwardState s = Forward(params, fm);
  return Embedding(s.output.begin(), s.output.end());
}

std::vector<Embedding> EncodeAll(const EncoderParams &params,
                                 std::span<const FeaturizedMention> inputs) {
  std::vector<Embedding> out(inputs.size());
  ParallelFor(inputs.size(), [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) out[i] = Encode(params, inputs[i]);
  });
  return out;
}

float Score(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    Fail(ErrorKind::kInvalidArgument,
         "score: dimension mismatch " + std::to_string(a.size()) + " vs " +
             std::to_string(b.size()));
  }
  float sum = 0.0f;
  for (size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

// ---------------------------------------------------------------------------
// Loss heads

HeadResult InBatchSoftmaxHead(const std::vector<std::vector<double>> &queries,
                              const std::vector<std::vector<double>> &positives,
                              double temperature) {
  const size_t b = queries.size();
  if (b < 2) Fail(ErrorKind::kInvalidArgument, "in-batch loss needs B >= 2");
  Require(positives.size() == b, "queries and positives must align");
  Require(temperature > 0.0, "temperature must be positive");
  const size_t dim = queries[0].size();

  HeadResult r;
  r.d_queries.assign(b, std::vector<double>(dim, 0.0));
  r.d_positives.assign(b, std::vector<double>(dim, 0.0));
  std::vector<double> scores(b), logits(b);
  for (size_t i = 0; i < b; ++i) {
    for (size_t j = 0; j < b; ++j) {
      scores[j] = Dot(queries[i], positives[j]);
      logits[j] = scores[j] / temperature;
    }
    const double lse = LogSumExp(logits);
    r.loss += (lse - logits[i]) / b;
    for (size_t j = 0; j < b; ++j) {
      const double g = (std::exp(logits[j] - lse) - (i == j ? 1.0 : 0.0)) / b;
      Axpy(g / temperature, positives[j], r.d_queries[i]);
      Axpy(g / temperature, queries[i], r.d_positives[j]);
      r.d_temperature -= g * scores[j] / (temperature * temperature);
    }
  }
  return r;
}

HeadResult HardNegativeHead(
    const std::vector<std::vector<double>> &queries,
    const std::vector<std::vector<double>> &positives,
    const std::vector<std::vector<std::vector<double>>> &negatives,
    double temperature) {
  const size_t b = queries.size();
  Require(b >= 1, "hard-negative loss needs at least one query");
  Require(positives.size() == b && negatives.size() == b,
          "queries, positives and negatives must align");
  Require(temperature > 0.0, "temperature must be positive");
  const size_t dim = queries[0].size();

  HeadResult r;
  r.d_queries.assign(b, std::vector<double>(dim, 0.0));
  r.d_positives.assign(b, std::vector<double>(dim, 0.0));
  r.d_negatives.resize(b);
  for (size_t i = 0; i < b; ++i) {
    const size_t k = negatives[i].size();
    r.d_negatives[i].assign(k, std::vector<double>(dim, 0.0));
    if (k == 0) {
      ++r.queries_without_negatives;
      continue;
    }
    std::vector<double> scores(k + 1), logits(k + 1);
    scores[0] = Dot(queries[i], positives[i]);
    for (size_t c = 0; c < k; ++c) scores[c + 1] = Dot(queries[i], negatives[i][c]);
    for (size_t c = 0; c <= k; ++c) logits[c] = scores[c] / temperature;
    const double lse = LogSumExp(logits);
    r.loss += (lse - logits[0]) / b;
    for (size_t c = 0; c <= k; ++c) {
      const double g = (std::exp(logits[c] - lse) - (c == 0 ? 1.0 : 0.0)) / b;
      const auto &cand = c == 0 ? positives[i] : negatives[i][c - 1];
      auto &d_cand = c == 0 ? r.d_positives[i] : r.d_negatives[i][c - 1];
      Axpy(g / temperature, cand, r.d_queries[i]);
      Axpy(g / temperature, queries[i], d_cand);
      r.d_temperature -= g * scores[c] / (temperature * temperature);
    }
  }
  return r;
}

namespace {

struct EncodedSide {
  std::vector<ForwardState> states;
  std::vector<std::vector<double>> outputs;
};

EncodedSide EncodeSide(const EncoderParams &params,
                       const std::vector<FeaturizedMention> &inputs) {
  EncodedSide side;
  side.states.resize(inputs.size());
  ParallelFor(inputs.size(), [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      side.states[i] = Forward(params, inputs[i]);
    }
  });
  side.outputs.reserve(inputs.size());
  for (const auto &s : side.states) side.outputs.push_back(s.output);
  return side;
}

void BackwardSide(const EncoderParams &params,
                  const std::vector<FeaturizedMention> &inputs,
                  const EncodedSide &side,
                  const std::vector<std::vector<double>> &d_outputs,
                  EncoderParams &grads) {
  for (size_t i = 0; i < inputs.size(); ++i) {
    Backward(params, inputs[i], side.states[i], d_outputs[i], grads);
  }
}

// Shared implementation; the flags choose which terms enter the total.
LossAndGradients ComputeLoss(const EncoderParams &params,
                             const TrainBatch &batch, bool use_inbatch,
                             bool use_hard, double hard_weight) {
  Require(batch.queries.size() == batch.positives.size(),
          "batch queries and positives must align");
  Require(batch.hard_negatives.empty() ||
              batch.hard_negatives.size() == batch.queries.size(),
          "hard negatives must align with queries");
  use_hard = use_hard && !batch.hard_negatives.empty();
  LossAndGradients out;
  out.gradients = params.ZerosLike();

  const EncodedSide q = EncodeSide(params, batch.queries);
  const EncodedSide p = EncodeSide(params, batch.positives);
  std::vector<std::vector<double>> dq(q.outputs.size(),
                                      std::vector<double>(params.output_dim()));
  std::vector<std::vector<double>> dp = dq;
  if (use_inbatch) {
    HeadResult head = InBatchSoftmaxHead(q.outputs, p.outputs, params.temperature);
    out.inbatch_loss = head.loss;
    out.loss += head.loss;
    dq = std::move(head.d_queries);
    dp = std::move(head.d_positives);
    out.gradients.temperature += head.d_temperature;
  }
  if (use_hard) {
    const size_t b = batch.queries.size();
    std::vector<EncodedSide> negs(b);
    std::vector<std::vector<std::vector<double>>> neg_outputs(b);
    for (size_t i = 0; i < b; ++i) {
      negs[i] = EncodeSide(params, batch.hard_negatives[i]);
      neg_outputs[i] = negs[i].outputs;
    }
    HeadResult head =
        HardNegativeHead(q.outputs, p.outputs, neg_outputs, params.temperature);
    if (head.queries_without_negatives > 0) {
      spdlog::debug("{} of {} queries had no hard negatives",
                    head.queries_without_negatives, b);
    }
    out.hard_negative_loss = head.loss;
    out.loss += hard_weight * head.loss;
    for (size_t i = 0; i < b; ++i) {
      Axpy(hard_weight, head.d_queries[i], dq[i]);
      Axpy(hard_weight, head.d_positives[i], dp[i]);
      for (auto &g : head.d_negatives[i]) {
        for (double &x : g) x *= hard_weight;
      }
      BackwardSide(params, batch.hard_negatives[i], negs[i], head.d_negatives[i],
                   out.gradients);
    }
    out.gradients.temperature += hard_weight * head.d_temperature;
  }
  BackwardSide(params, batch.queries, q, dq, out.gradients);
  BackwardSide(params, batch.positives, p, dp, out.gradients);
  return out;
}

}  // namespace

LossAndGradients InBatchLoss(const EncoderParams &params,
                             const TrainBatch &batch) {
  return ComputeLoss(params, batch, true, false, 0.0);
}

LossAndGradients HardNegativeLoss(const EncoderParams &params,
                                  const TrainBatch &batch) {
  Require(!batch.hard_negatives.empty(), "batch carries no hard negatives");
  return ComputeLoss(params, batch, false, true, 1.0);
}

LossAndGradients TrainingLoss(const EncoderParams &params,
                              const TrainBatch &batch,
                              double hard_negative_weight) {
  return ComputeLoss(params, batch, true, true, hard_negative_weight);
}

// ---------------------------------------------------------------------------
// AdamW

AdamW::AdamW(const EncoderParams &shape, const AdamOptions &options)
    : options_(options),
      first_moment_(shape.ZerosLike()),
      second_moment_(shape.ZerosLike()) {}

void AdamW::Step(EncoderParams &params, const EncoderParams &grads,
                 double learning_rate) {
  ++steps_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(steps_));

  std::vector<std::span<const double>> g_tensors;
  grads.ForEachTensor([&](std::string_view, std::span<const double> v, bool) {
    g_tensors.push_back(v);
  });
  std::vector<std::span<double>> m_tensors, v_tensors;
  first_moment_.ForEachTensor(
      [&](std::string_view, std::span<double> v, bool) { m_tensors.push_back(v); });
  second_moment_.ForEachTensor(
      [&](std::string_view, std::span<double> v, bool) { v_tensors.push_back(v); });

  size_t t = 0;
  params.ForEachTensor([&](std::string_view, std::span<double> p, bool decayed) {
    auto g = g_tensors[t];
    auto m = m_tensors[t];
    auto v = v_tensors[t];
    ++t;
    Require(g.size() == p.size(), "gradient shape mismatch");
    const double decay = decayed ? options_.weight_decay : 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= learning_rate *
              (m_hat / (std::sqrt(v_hat) + options_.epsilon) + decay * p[i]);
    }
  });
}

// ---------------------------------------------------------------------------
// Training loop

double ScheduledLearningRate(const TrainConfig &config, int step) {
  const int warmup = std::max(
      1, static_cast<int>(std::lround(config.warmup_fraction * config.steps)));
  if (step >= warmup) return config.learning_rate;
  return config.learning_rate * (step + 1) / warmup;
}

TrainResult Train(EncoderParams params, const TrainingSet &data,
                  const TrainConfig &config) {
  params.Validate();
  Require(config.steps >= 0, "steps must be non-negative");
  Require(config.min_temperature > 0.0 &&
              config.min_temperature <= config.max_temperature,
          "invalid temperature bounds");
  const size_t n = data.examples.size();
  if (n == 0) Fail(ErrorKind::kInvalidArgument, "training set is empty");
  if (n < 2) Fail(ErrorKind::kInvalidArgument, "need at least two training pairs");
  const size_t batch_size =
      std::min(n, static_cast<size_t>(std::max(2, config.batch_size)));
  bool has_negatives = false;
  for (const auto &ex : data.examples) has_negatives |= !ex.negatives.empty();

  TrainResult result;
  AdamW optimizer(params, config.adam);
  Rng rng(config.seed);
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  size_t cursor = n;

  for (int step = 0; step < config.steps; ++step) {
    TrainBatch batch;
    for (size_t b = 0; b < batch_size; ++b) {
      if (cursor == n) {
        rng.Shuffle(order);
        cursor = 0;
      }
      const auto &ex = data.examples[order[cursor++]];
      batch.queries.push_back(data.mentions.at(ex.query));
      batch.positives.push_back(data.mentions.at(ex.positive));
      if (has_negatives) {
        auto &negs = batch.hard_negatives.emplace_back();
        for (int32_t id : ex.negatives) negs.push_back(data.mentions.at(id));
      }
    }
    LossAndGradients lg = TrainingLoss(params, batch, config.hard_negative_weight);
    if (!std::isfinite(lg.loss)) {
      Fail(ErrorKind::kNumerical,
           "training diverged at step " + std::to_string(step) +
               ": loss is " + std::to_string(lg.loss));
    }
    result.loss_curve.push_back(lg.loss);
    optimizer.Step(params, lg.gradients, ScheduledLearningRate(config, step));
    params.temperature = std::clamp(params.temperature, config.min_temperature,
                                    config.max_temperature);
    if (!params.AllFinite()) {
      Fail(ErrorKind::kNumerical, "non-finite parameters after step " +
                                      std::to_string(step));
    }
    if (config.log_every > 0 && (step + 1) % config.log_every == 0) {
      spdlog::info("step {}/{} loss {:.5f} (in-batch {:.5f}, hard {:.5f}) "
                   "temperature {:.4f}",
                   step + 1, config.steps, lg.loss, lg.inbatch_loss,
                   lg.hard_negative_loss, params.temperature);
    }
  }
  result.params = std::move(params);
  return result;
}

// ---------------------------------------------------------------------------
// Checkpoints

std::string SerializeCheckpoint(const EncoderParams &params) {
  params.Validate();
  BinaryWriter w;
  w.WriteMagic("MLMN");
  w.Write<uint32_t>(kCheckpointVersion);
  w.Write<uint32_t>(static_cast<uint32_t>(params.vocab_size()));
  w.Write<uint32_t>(static_cast<uint32_t>(params.embedding_dim()));
  w.Write<uint32_t>(static_cast<uint32_t>(params.hidden_dim()));
  w.Write<uint32_t>(static_cast<uint32_t>(params.output_dim()));
  params.ForEachTensor([&](std::string_view, std::span<const double> v, bool) {
    for (double x : v) w.Write<float>(static_cast<float>(x));
  });
  return w.buffer();
}

EncoderParams ParseCheckpoint(std::string_view bytes, std::string_view source) {
  BinaryReader r(bytes, std::string(source));
  r.ExpectMagic("MLMN");
  const auto version = r.Read<uint32_t>();
  if (version != kCheckpointVersion) {
    Fail(ErrorKind::kVersionMismatch,
         std::string(source) + ": checkpoint version " + std::to_string(version) +
             ", expected " + std::to_string(kCheckpointVersion));
  }
  const auto vocab = r.Read<uint32_t>();
  const auto emb = r.Read<uint32_t>();
  const auto hidden = r.Read<uint32_t>();
  const auto out = r.Read<uint32_t>();
  constexpr uint32_t kMaxDim = 1u << 24;
  if (vocab > kMaxDim || emb > kMaxDim || hidden > kMaxDim || out > kMaxDim ||
      uint64_t{vocab} * emb > bytes.size()) {
    Fail(ErrorKind::kParse, std::string(source) + ": implausible dimensions");
  }
  EncoderParams p = EncoderParams::Zeros(static_cast<int32_t>(vocab),
                                         static_cast<int>(emb),
                                         static_cast<int>(hidden),
                                         static_cast<int>(out));
  p.ForEachTensor([&](std::string_view, std::span<double> v, bool) {
    for (double &x : v) x = static_cast<double>(r.Read<float>());
  });
  r.ExpectEnd();
  p.Validate();
  return p;
}

void SaveCheckpoint(const EncoderParams &params,
                    const std::filesystem::path &path) {
  WriteFileAtomic(path, SerializeCheckpoint(params));
}

EncoderParams LoadCheckpoint(const std::filesystem::path &path) {
  return ParseCheckpoint(ReadFile(path), path.string());
}

}  // namespace mlink
