#include "mre/fusion.hpp"

#include <cmath>

#include "mre/errors.hpp"
#include "mre/losses.hpp"

namespace mre {

FusionParams FusionParams::init(std::size_t d_model, std::size_t rank, std::size_t d_out,
                                std::size_t classes, Rng& rng) {
  if (rank == 0 || d_out == 0 || d_model == 0)
    throw ContractError("fusion dimensions must be positive");
  FusionParams p;
  p.rank = rank;
  const double limit = std::sqrt(6.0 / static_cast<double>(d_model + 1 + d_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (auto& f : p.factors) {
    std::vector<double> w((d_model + 1) * rank * d_out);
    for (auto& v : w) v = dist(rng);
    f = Tensor({d_model + 1, rank * d_out}, std::move(w), true);
  }
  p.bias = Tensor({d_out}, true);
  if (d_out != classes) p.classifier = Dense::init(d_out, classes, rng);
  return p;
}

Matrix FusionParams::factor(Modality m, std::size_t r) const {
  const Tensor& f = factors[static_cast<std::size_t>(m)];
  const std::size_t in = f.dim(0);
  const std::size_t d_out = out_dim();
  Matrix w{d_out, in, std::vector<double>(d_out * in)};
  for (std::size_t o = 0; o < d_out; ++o)
    for (std::size_t k = 0; k < in; ++k) w(o, k) = f[k * rank * d_out + r * d_out + o];
  return w;
}

void FusionParams::set_factor(Modality m, std::size_t r, const Matrix& w) {
  Tensor& f = factors[static_cast<std::size_t>(m)];
  const std::size_t in = f.dim(0);
  const std::size_t d_out = out_dim();
  if (w.rows != d_out || w.cols != in || r >= rank)
    throw ShapeError("set_factor: expected " + std::to_string(d_out) + "x" + std::to_string(in));
  auto data = f.mutable_data();
  for (std::size_t o = 0; o < d_out; ++o)
    for (std::size_t k = 0; k < in; ++k) data[k * rank * d_out + r * d_out + o] = w(o, k);
}

std::vector<Tensor> FusionParams::parameters() const {
  std::vector<Tensor> out(factors.begin(), factors.end());
  out.push_back(bias);
  if (classifier)
    for (auto& p : classifier->parameters()) out.push_back(p);
  return out;
}

Tensor low_rank_fuse(const Tensor& vision, const Tensor& audio, const Tensor& text,
                     const FusionParams& params) {
  const std::size_t d = params.input_dim();
  const std::array<const Tensor*, kModalityCount> inputs{&vision, &audio, &text};
  for (const Tensor* t : inputs)
    if (t->rank() != 2 || t->dim(1) != d || t->dim(0) != vision.dim(0))
      throw ShapeError("low_rank_fuse: inputs " + shape_string(vision.shape()) + ", " +
                       shape_string(audio.shape()) + ", " + shape_string(text.shape()) +
                       " for d_model " + std::to_string(d));
  const std::size_t batch = vision.dim(0);
  const std::size_t d_out = params.out_dim();
  Tensor ones = Tensor::full({batch, 1}, 1.0);

  Tensor product;
  for (std::size_t m = 0; m < kModalityCount; ++m) {
    Tensor z = matmul(concat({*inputs[m], ones}, 1), params.factors[m]);  // [B, R * d_out]
    product = product.defined() ? multiply(product, z) : z;
  }
  Tensor per_rank = reshape(product, {batch, params.rank, d_out});
  return add(sum(per_rank, 1), params.bias);
}

Tensor classify(const Tensor& fused, const FusionParams& params) {
  if (fused.rank() != 2 || fused.dim(1) != params.out_dim())
    throw ShapeError("classify: fused feature " + shape_string(fused.shape()));
  return params.classifier ? (*params.classifier)(fused) : fused;
}

LossBundle total_loss(const Tensor& logits, std::span<const int> labels, const Tensor& l_rs,
                      const Tensor& l_cnce, double lambda_rs, double lambda_cnce) {
  LossBundle out;
  out.ce = cross_entropy(logits, labels);
  out.l_rs = l_rs;
  out.l_cnce = l_cnce;
  out.lambda_rs = lambda_rs;
  out.lambda_cnce = lambda_cnce;
  out.total = add(add(out.ce, scale(l_rs, lambda_rs)), scale(l_cnce, lambda_cnce));
  return out;
}

}  // namespace mre
