#pragma once

// Modality encoders mapping per-timestep feature rows into the shared
// d_model embedding space: a 3-layer ReLU DNN for vision and audio, a
// single-layer LSTM for text, followed by temporal mean pooling.

#include <array>
#include <span>
#include <vector>

#include "mre/matrix.hpp"
#include "mre/tensor.hpp"

namespace mre {

struct ForwardMode {
  bool train = false;
  double keep_prob = 1.0;
  Rng* rng = nullptr;
};

// Affine map x[..., in] -> x[..., out]; weight is [in, out].
struct Dense {
  Tensor weight;
  Tensor bias;

  static Dense init(std::size_t in, std::size_t out, Rng& rng);
  static Dense zeros(std::size_t in, std::size_t out);
  std::size_t in_dim() const { return weight.dim(0); }
  std::size_t out_dim() const { return weight.dim(1); }
  Tensor operator()(const Tensor& x) const;
  std::vector<Tensor> parameters() const { return {weight, bias}; }
};

struct DnnParams {
  std::array<Dense, 3> layers;

  static DnnParams init(std::size_t d_in, std::size_t d_model, Rng& rng);
  std::size_t input_dim() const { return layers[0].in_dim(); }
  std::size_t output_dim() const { return layers[2].out_dim(); }
  std::vector<Tensor> parameters() const;
};

// Gate blocks along the 4H axis are ordered (input, forget, candidate, output).
struct LstmParams {
  Tensor input_weight;   // [d_in, 4H]
  Tensor hidden_weight;  // [H, 4H]
  Tensor bias;           // [4H]

  static LstmParams init(std::size_t d_in, std::size_t hidden, Rng& rng);
  std::size_t input_dim() const { return input_weight.dim(0); }
  std::size_t hidden_size() const { return hidden_weight.dim(0); }
  std::vector<Tensor> parameters() const { return {input_weight, hidden_weight, bias}; }
};

struct EncoderParams {
  DnnParams vision;
  DnnParams audio;
  LstmParams text;

  static EncoderParams init(std::size_t d_v, std::size_t d_a, std::size_t d_t,
                            std::size_t d_model, Rng& rng);
  std::vector<Tensor> parameters() const;
};

struct ModalityEmbedding {
  Tensor sequence;  // [T, d_model]
  Tensor pooled;    // [d_model]
};

// affine -> ReLU -> dropout -> affine -> ReLU -> dropout -> affine, row-wise.
Tensor dnn_encode(const Tensor& x, const DnnParams& params, const ForwardMode& mode = {});

struct LstmState {
  Tensor hidden;  // [G, H]
  Tensor cell;    // [G, H]
};

// One recurrence step over a batch of G rows.
LstmState lstm_cell(const Tensor& x, const LstmState& prev, const LstmParams& params);

// Full hidden-state sequence [T, H] from zero initial state.
Tensor lstm_encode(const Tensor& x, const LstmParams& params);

// Row mean of a [T, d] sequence, shape [d].
Tensor mean_pool(const Tensor& seq);

ModalityEmbedding embed_dnn(const Tensor& x, const DnnParams& params, const ForwardMode& mode = {});
ModalityEmbedding embed_lstm(const Tensor& x, const LstmParams& params);

// Batched encode-then-pool over variable-length sequences; result [B, d_model]
// with row b equal to the pooled embedding of seqs[b].
Tensor dnn_encode_pooled(std::span<const Matrix* const> seqs, const DnnParams& params,
                         const ForwardMode& mode = {});
Tensor lstm_encode_pooled(std::span<const Matrix* const> seqs, const LstmParams& params);

}  // namespace mre
