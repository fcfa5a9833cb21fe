#include "mre/encoders.hpp"

#include <cmath>
#include <map>

#include "mre/errors.hpp"

namespace mre {

namespace {

Tensor xavier_uniform(std::size_t in, std::size_t out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  std::vector<double> w(in * out);
  for (auto& v : w) v = dist(rng);
  return Tensor({in, out}, std::move(w), true);
}

void require_rows(const Tensor& x, std::size_t cols, const char* who) {
  if (x.rank() != 2) throw ShapeError(std::string(who) + ": expected a [T, d] matrix, got " +
                                      shape_string(x.shape()));
  if (x.dim(1) != cols)
    throw ShapeError(std::string(who) + ": input width " + std::to_string(x.dim(1)) +
                     " does not match parameter width " + std::to_string(cols));
}

void require_nonempty(std::span<const Matrix* const> seqs, std::size_t cols, const char* who) {
  if (seqs.empty()) throw ContractError(std::string(who) + ": empty batch");
  for (const Matrix* m : seqs) {
    if (m->rows == 0) throw ContractError(std::string(who) + ": empty sequence");
    if (m->cols != cols)
      throw ShapeError(std::string(who) + ": feature width " + std::to_string(m->cols) +
                       " does not match parameter width " + std::to_string(cols));
  }
}

}  // namespace

Dense Dense::init(std::size_t in, std::size_t out, Rng& rng) {
  return Dense{xavier_uniform(in, out, rng), Tensor({out}, true)};
}

Dense Dense::zeros(std::size_t in, std::size_t out) {
  return Dense{Tensor({in, out}, true), Tensor({out}, true)};
}

Tensor Dense::operator()(const Tensor& x) const { return add(matmul(x, weight), bias); }

DnnParams DnnParams::init(std::size_t d_in, std::size_t d_model, Rng& rng) {
  return DnnParams{{Dense::init(d_in, d_model, rng), Dense::init(d_model, d_model, rng),
                    Dense::init(d_model, d_model, rng)}};
}

std::vector<Tensor> DnnParams::parameters() const {
  std::vector<Tensor> out;
  for (const auto& l : layers)
    for (auto& p : l.parameters()) out.push_back(p);
  return out;
}

LstmParams LstmParams::init(std::size_t d_in, std::size_t hidden, Rng& rng) {
  return LstmParams{xavier_uniform(d_in, 4 * hidden, rng), xavier_uniform(hidden, 4 * hidden, rng),
                    Tensor({4 * hidden}, true)};
}

EncoderParams EncoderParams::init(std::size_t d_v, std::size_t d_a, std::size_t d_t,
                                  std::size_t d_model, Rng& rng) {
  EncoderParams p;
  p.vision = DnnParams::init(d_v, d_model, rng);
  p.audio = DnnParams::init(d_a, d_model, rng);
  p.text = LstmParams::init(d_t, d_model, rng);
  return p;
}

std::vector<Tensor> EncoderParams::parameters() const {
  std::vector<Tensor> out = vision.parameters();
  for (auto& p : audio.parameters()) out.push_back(p);
  for (auto& p : text.parameters()) out.push_back(p);
  return out;
}

Tensor dnn_encode(const Tensor& x, const DnnParams& params, const ForwardMode& mode) {
  require_rows(x, params.input_dim(), "dnn_encode");
  if (mode.train && mode.keep_prob < 1.0 && mode.rng == nullptr)
    throw ContractError("dnn_encode: train-mode dropout needs an rng");
  Tensor h = x;
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    h = params.layers[i](h);
    if (i + 1 < params.layers.size()) {
      h = relu(h);
      if (mode.train && mode.keep_prob < 1.0) h = dropout(h, mode.keep_prob, *mode.rng, true);
    }
  }
  return h;
}

LstmState lstm_cell(const Tensor& x, const LstmState& prev, const LstmParams& params) {
  const std::size_t hsz = params.hidden_size();
  Tensor z = add(add(matmul(x, params.input_weight), matmul(prev.hidden, params.hidden_weight)),
                 params.bias);
  Tensor input_gate = sigmoid(slice(z, 1, 0, hsz));
  Tensor forget_gate = sigmoid(slice(z, 1, hsz, 2 * hsz));
  Tensor candidate = tanh(slice(z, 1, 2 * hsz, 3 * hsz));
  Tensor output_gate = sigmoid(slice(z, 1, 3 * hsz, 4 * hsz));
  Tensor cell = forget_gate * prev.cell + input_gate * candidate;
  return LstmState{output_gate * tanh(cell), cell};
}

Tensor lstm_encode(const Tensor& x, const LstmParams& params) {
  require_rows(x, params.input_dim(), "lstm_encode");
  const std::size_t steps = x.dim(0);
  const std::size_t hsz = params.hidden_size();
  LstmState state{Tensor({1, hsz}), Tensor({1, hsz})};
  std::vector<Tensor> hidden;
  hidden.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    state = lstm_cell(slice(x, 0, t, t + 1), state, params);
    hidden.push_back(state.hidden);
  }
  return concat(hidden, 0);
}

Tensor mean_pool(const Tensor& seq) {
  if (seq.rank() != 2) throw ShapeError("mean_pool expects [T, d], got " + shape_string(seq.shape()));
  return mean(seq, 0);
}

ModalityEmbedding embed_dnn(const Tensor& x, const DnnParams& params, const ForwardMode& mode) {
  Tensor seq = dnn_encode(x, params, mode);
  return {seq, mean_pool(seq)};
}

ModalityEmbedding embed_lstm(const Tensor& x, const LstmParams& params) {
  Tensor seq = lstm_encode(x, params);
  return {seq, mean_pool(seq)};
}

Tensor dnn_encode_pooled(std::span<const Matrix* const> seqs, const DnnParams& params,
                         const ForwardMode& mode) {
  const std::size_t width = params.input_dim();
  require_nonempty(seqs, width, "dnn_encode_pooled");
  std::size_t total = 0;
  for (const Matrix* m : seqs) total += m->rows;

  // All timesteps go through the DNN as one tall matrix, then a constant
  // averaging matrix pools each sample's rows.
  std::vector<double> stacked;
  stacked.reserve(total * width);
  std::vector<double> pool(seqs.size() * total, 0.0);
  std::size_t offset = 0;
  for (std::size_t b = 0; b < seqs.size(); ++b) {
    const Matrix& m = *seqs[b];
    stacked.insert(stacked.end(), m.values.begin(), m.values.end());
    const double w = 1.0 / static_cast<double>(m.rows);
    for (std::size_t r = 0; r < m.rows; ++r) pool[b * total + offset + r] = w;
    offset += m.rows;
  }
  Tensor encoded = dnn_encode(Tensor({total, width}, std::move(stacked)), params, mode);
  return matmul(Tensor({seqs.size(), total}, std::move(pool)), encoded);
}

Tensor lstm_encode_pooled(std::span<const Matrix* const> seqs, const LstmParams& params) {
  const std::size_t width = params.input_dim();
  const std::size_t hsz = params.hidden_size();
  require_nonempty(seqs, width, "lstm_encode_pooled");

  // Samples of equal length run the recurrence together.
  std::map<std::size_t, std::vector<std::size_t>> by_length;
  for (std::size_t b = 0; b < seqs.size(); ++b) by_length[seqs[b]->rows].push_back(b);

  std::vector<Tensor> pooled_groups;
  std::vector<std::size_t> group_order;
  for (const auto& [length, members] : by_length) {
    const std::size_t g = members.size();
    LstmState state{Tensor({g, hsz}), Tensor({g, hsz})};
    Tensor total;
    for (std::size_t t = 0; t < length; ++t) {
      std::vector<double> step(g * width);
      for (std::size_t i = 0; i < g; ++i) {
        const Matrix& m = *seqs[members[i]];
        std::copy_n(m.values.begin() + t * width, width, step.begin() + i * width);
      }
      state = lstm_cell(Tensor({g, width}, std::move(step)), state, params);
      total = total.defined() ? add(total, state.hidden) : state.hidden;
    }
    pooled_groups.push_back(scale(total, 1.0 / static_cast<double>(length)));
    group_order.insert(group_order.end(), members.begin(), members.end());
  }

  Tensor grouped = pooled_groups.size() == 1 ? pooled_groups[0] : concat(pooled_groups, 0);
  std::vector<std::size_t> restore(seqs.size());
  for (std::size_t pos = 0; pos < group_order.size(); ++pos) restore[group_order[pos]] = pos;
  bool identity = true;
  for (std::size_t b = 0; b < restore.size(); ++b) identity = identity && restore[b] == b;
  return identity ? grouped : gather_rows(grouped, restore);
}

}  // namespace mre
