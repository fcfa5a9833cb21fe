#include <doctest.h>

#include <cmath>

#include "mre/errors.hpp"
#include "mre/gradcheck.hpp"
#include "mre/relevance.hpp"
#include "test_util.hpp"

using namespace mre;
using mre::test::max_abs_diff;
using mre::test::random_tensor;

namespace {

void fill(Tensor& t, std::initializer_list<double> values) {
  auto d = t.mutable_data();
  REQUIRE(values.size() == d.size());
  std::copy(values.begin(), values.end(), d.begin());
}

// Logits [rows, C] whose softmax puts probability p on class `target`, the
// rest spread evenly.
std::vector<double> logits_with_prob(double p, std::size_t target, std::size_t classes) {
  std::vector<double> out(classes, std::log((1.0 - p) / static_cast<double>(classes - 1)));
  out[target] = std::log(p);
  return out;
}

}  // namespace

TEST_CASE("self_attention on identical rows returns the row") {
  Tensor s({3, 4}, {1, 2, 3, 4, 1, 2, 3, 4, 1, 2, 3, 4});
  Tensor a = self_attention(s);
  CHECK(max_abs_diff(a, s) < 1e-15);
}

TEST_CASE("self_attention on a zero stack is uniform with zero output") {
  Tensor s({3, 2});
  Tensor scores = attention_scores(s);
  for (double v : scores.data()) CHECK(std::abs(v - 1.0 / 3.0) < 1e-15);
  Tensor a = self_attention(s);
  for (double v : a.data()) CHECK(v == 0.0);
}

TEST_CASE("self_attention matches an independent script") {
  Tensor a = self_attention(Tensor({3, 2}, {1, 0, 0, 1, 0, 0}));
  const double expected[] = {0.5034898434845538, 0.2482550782577231, 0.2482550782577231,
                             0.5034898434845538, 0.3333333333333333, 0.3333333333333333};
  for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(a[i] - expected[i]) < 1e-14);
}

TEST_CASE("stacking and batched attention agree with per-sample attention") {
  Rng rng(1);
  Tensor v = random_tensor({4, 3}, rng), au = random_tensor({4, 3}, rng),
         t = random_tensor({4, 3}, rng);
  Tensor stack = stack_modalities(v, au, t);
  CHECK(stack.shape() == Shape{4, 3, 3});
  Tensor batched = self_attention(stack);
  for (std::size_t b = 0; b < 4; ++b) {
    Tensor one = self_attention(reshape(slice(stack, 0, b, b + 1), {3, 3}));
    for (std::size_t i = 0; i < 9; ++i) CHECK(std::abs(batched[b * 9 + i] - one[i]) < 1e-15);
  }
  CHECK(stack[0 * 9 + 3] == au[0]);
  CHECK(stack[1 * 9 + 6] == t[3]);
}

TEST_CASE("attention rows and relevance weights are distributions") {
  Rng rng(2);
  Mlp m1 = Mlp::init(12, 5, 3, rng);
  for (int trial = 0; trial < 100; ++trial) {
    Tensor s = random_tensor({2, 3, 4}, rng, 2.0);
    Tensor scores = attention_scores(s);
    for (std::size_t r = 0; r < 6; ++r) {
      double total = 0.0;
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK(scores[r * 3 + j] >= 0.0);
        total += scores[r * 3 + j];
      }
      CHECK(std::abs(total - 1.0) < 1e-12);
    }
    Tensor h = relevance_weights(self_attention(s), m1);
    CHECK(h.shape() == Shape{2, 3});
    for (std::size_t b = 0; b < 2; ++b) {
      const double total = h[b * 3] + h[b * 3 + 1] + h[b * 3 + 2];
      CHECK(std::abs(total - 1.0) < 1e-9);
      for (std::size_t m = 0; m < 3; ++m) CHECK((h[b * 3 + m] >= 0.0 && h[b * 3 + m] <= 1.0));
    }
  }
}

TEST_CASE("zero M1 gives uniform relevance weights") {
  Rng rng(3);
  Tensor h = relevance_weights(random_tensor({3, 5}, rng), Mlp::zeros(15, 4, 3));
  for (double v : h.data()) CHECK(std::abs(v - 1.0 / 3.0) < 1e-15);
}

TEST_CASE("hand-set M1 with one hidden unit") {
  Mlp m1 = Mlp::zeros(6, 1, 3);
  fill(m1.hidden.weight, {1, 0, 0, 0, 0, 2});
  fill(m1.hidden.bias, {0.5});
  fill(m1.out.weight, {1, -1, 0});
  fill(m1.out.bias, {0, 0, 1});
  // hidden = relu(1*1 + 2*0.5 + 0.5) = 2.5; logits (2.5, -2.5, 1)
  Tensor a({3, 2}, {1, 0, 0, 1, 0.5, 0.5});
  Tensor h = relevance_weights(a, m1);
  CHECK(std::abs(h[0] - 0.8130953182608678) < 1e-15);
  CHECK(std::abs(h[1] - 0.005478593159646257) < 1e-15);
  CHECK(std::abs(h[2] - 0.18142608857948594) < 1e-15);
}

TEST_CASE("zero M2 gives uniform category estimates") {
  Rng rng(4);
  RelevanceHeads heads{Mlp::zeros(12, 3, 3), Mlp::zeros(4, 3, 5), Mlp::zeros(12, 3, 5)};
  CategoryEstimates est = category_estimates(random_tensor({2, 3, 4}, rng), heads);
  CHECK(est.modality_logits.shape() == Shape{2, 3, 5});
  CHECK(est.multimodal_logits.shape() == Shape{2, 5});
  Tensor p = row_softmax(est.modality_logits);
  for (double v : p.data()) CHECK(std::abs(v - 0.2) < 1e-15);
}

TEST_CASE("category estimate shapes for several class counts") {
  Rng rng(5);
  for (std::size_t c : {2, 3, 7}) {
    RelevanceHeads heads = RelevanceHeads::init(4, 6, c, rng);
    CHECK(heads.classes() == c);
    CategoryEstimates est = category_estimates(random_tensor({3, 4}, rng), heads);
    CHECK(est.modality_logits.shape() == Shape{1, 3, c});
    CHECK(est.multimodal_logits.shape() == Shape{1, c});
  }
}

TEST_CASE("hand-set M2 shared across modality rows") {
  RelevanceHeads heads{Mlp::zeros(6, 1, 3), Mlp::zeros(2, 1, 2), Mlp::zeros(6, 1, 2)};
  fill(heads.category.hidden.weight, {1, -1});
  fill(heads.category.out.weight, {1, -1});
  fill(heads.category.out.bias, {0, 0.5});
  // rows: relu(1) -> (1, -0.5); relu(-1) -> (0, 0.5); relu(0) -> (0, 0.5)
  CategoryEstimates est = category_estimates(Tensor({3, 2}, {1, 0, 0, 1, 0.5, 0.5}), heads);
  const double expected[] = {1, -0.5, 0, 0.5, 0, 0.5};
  for (std::size_t i = 0; i < 6; ++i) CHECK(est.modality_logits[i] == expected[i]);
}

TEST_CASE("weighted_embedding examples") {
  Tensor pooled({3, 2}, {2, 0, 0, 2, 1, 1});
  Tensor w = weighted_embedding(pooled, Tensor({3}, {0.5, 0.3, 0.2}));
  const double expected[] = {1, 0, 0, 0.6, 0.2, 0.2};
  for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(w[i] - expected[i]) < 1e-15);

  Tensor onehot = weighted_embedding(pooled, Tensor({3}, {1, 0, 0}));
  CHECK(onehot[0] == 2.0);
  for (std::size_t i = 2; i < 6; ++i) CHECK(onehot[i] == 0.0);

  Tensor third = weighted_embedding(pooled, Tensor::full({3}, 1.0 / 3.0));
  for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(third[i] - pooled[i] / 3.0) < 1e-15);
}

TEST_CASE("relevant semantic loss closed forms") {
  const std::vector<int> labels = {1, 0};
  // Every head puts 0.5 on the label: CE = ln 2 per head.
  CategoryEstimates est{Tensor({2, 3, 2}), Tensor({2, 2})};
  const double five_ln2 = 5.0 * std::log(2.0);
  Tensor uniform = Tensor::full({2, 3}, 1.0 / 3.0);
  CHECK(std::abs(relevant_semantic_loss(est, uniform, labels).item() - five_ln2) < 1e-12);
  Tensor onehot({2, 3}, {1, 0, 0, 1, 0, 0});
  CHECK(std::abs(relevant_semantic_loss(est, onehot, labels).item() - five_ln2) < 1e-12);

  // Near-certain heads: loss is essentially zero.
  std::vector<double> sure;
  for (int y : labels)
    for (int r = 0; r < 3; ++r) {
      auto l = logits_with_prob(1.0 - 1e-15, static_cast<std::size_t>(y), 2);
      sure.insert(sure.end(), l.begin(), l.end());
    }
  std::vector<double> sure_mm;
  for (int y : labels) {
    auto l = logits_with_prob(1.0 - 1e-15, static_cast<std::size_t>(y), 2);
    sure_mm.insert(sure_mm.end(), l.begin(), l.end());
  }
  CategoryEstimates perfect{Tensor({2, 3, 2}, sure), Tensor({2, 2}, sure_mm)};
  CHECK(relevant_semantic_loss(perfect, uniform, labels).item() < 1e-12);
}

TEST_CASE("relevant semantic loss prefers weight on the lowest-loss modality") {
  const std::vector<int> labels = {2};
  std::vector<double> rows;
  for (double p : {0.9, 0.4, 0.2}) {
    auto l = logits_with_prob(p, 2, 3);
    rows.insert(rows.end(), l.begin(), l.end());
  }
  CategoryEstimates est{Tensor({1, 3, 3}, rows), Tensor({1, 3}, logits_with_prob(0.5, 2, 3))};
  double previous = 1e9;
  for (double hv : {0.0, 0.2, 0.5, 0.8, 1.0}) {
    const double rest = (1.0 - hv) / 2.0;
    const double value =
        relevant_semantic_loss(est, Tensor({1, 3}, {hv, rest, rest}), labels).item();
    CHECK(value >= 0.0);
    CHECK(value < previous);
    previous = value;
  }
}

TEST_CASE("relevant semantic loss rejects bad labels and shapes") {
  CategoryEstimates est{Tensor({1, 3, 2}), Tensor({1, 2})};
  const std::vector<int> bad = {2};
  CHECK_THROWS_AS(relevant_semantic_loss(est, Tensor::full({1, 3}, 1.0 / 3), bad), ContractError);
  const std::vector<int> two = {0, 1};
  CHECK_THROWS_AS(relevant_semantic_loss(est, Tensor::full({2, 3}, 1.0 / 3), two), ShapeError);
}

TEST_CASE("permuting the stack and M1 wiring permutes the relevance weights") {
  Rng rng(6);
  const std::size_t d = 3, hidden = 4;
  Mlp m1 = Mlp::init(3 * d, hidden, 3, rng);
  for (auto& v : m1.out.bias.mutable_data()) v = std::normal_distribution<double>(0, 1)(rng);
  Tensor s = random_tensor({3, d}, rng);
  const std::size_t perm[] = {2, 0, 1};

  Mlp permuted = Mlp::zeros(3 * d, hidden, 3);
  auto hw = permuted.hidden.weight.mutable_data();
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t u = 0; u < hidden; ++u)
        hw[(k * d + i) * hidden + u] = m1.hidden.weight[(perm[k] * d + i) * hidden + u];
  std::copy(m1.hidden.bias.data().begin(), m1.hidden.bias.data().end(),
            permuted.hidden.bias.mutable_data().begin());
  auto ow = permuted.out.weight.mutable_data();
  for (std::size_t u = 0; u < hidden; ++u)
    for (std::size_t k = 0; k < 3; ++k) ow[u * 3 + k] = m1.out.weight[u * 3 + perm[k]];
  for (std::size_t k = 0; k < 3; ++k) permuted.out.bias.mutable_data()[k] = m1.out.bias[perm[k]];

  std::vector<std::size_t> rows(perm, perm + 3);
  Tensor h = relevance_weights(self_attention(s), m1);
  Tensor hp = relevance_weights(self_attention(gather_rows(s, rows)), permuted);
  for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(hp[k] - h[perm[k]]) < 1e-14);
}

TEST_CASE("gradient of the relevant semantic loss reaches M1, M2 and the multimodal head") {
  Rng rng(7);
  const std::size_t d = 4;
  RelevanceHeads heads = RelevanceHeads::init(d, 5, 3, rng);
  Tensor stack = random_tensor({3, 3, d}, rng, 1.0, true);
  const std::vector<int> labels = {0, 2, 1};
  auto f = [&] {
    Tensor a = self_attention(stack);
    return relevant_semantic_loss(category_estimates(a, heads),
                                  relevance_weights(a, heads.modality_weights), labels);
  };
  std::vector<Tensor> all = heads.parameters();
  all.push_back(stack);
  CHECK(grad_check(f, all) < 1e-4);

  f().backward();
  double m1_grad = 0.0;
  for (const auto& p : heads.modality_weights.parameters())
    for (double g : p.grad()) m1_grad += std::abs(g);
  CHECK(m1_grad > 0.0);
}
