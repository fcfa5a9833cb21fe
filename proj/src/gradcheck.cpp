#include "mre/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mre/errors.hpp"

namespace mre {

namespace {

double evaluate(const std::function<Tensor()>& f, std::size_t tensor, std::size_t coord) {
  const double v = f().item();
  if (!std::isfinite(v))
    throw NumericalError("grad_check: non-finite objective at tensor " + std::to_string(tensor) +
                         ", coordinate " + std::to_string(coord));
  return v;
}

}  // namespace

double grad_check(const std::function<Tensor()>& f, std::vector<Tensor> thetas, double eps) {
  if (!(eps > 0.0)) throw ContractError("grad_check step must be positive");
  for (auto& t : thetas) t.zero_grad();
  Tensor loss = f();
  if (!std::isfinite(loss.item())) throw NumericalError("grad_check: non-finite objective");
  loss.backward();

  double worst = 0.0;
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    Tensor& theta = thetas[k];
    std::vector<double> analytic(theta.numel(), 0.0);
    if (theta.has_grad()) std::copy(theta.grad().begin(), theta.grad().end(), analytic.begin());
    auto values = theta.mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + eps;
      const double plus = evaluate(f, k, i);
      values[i] = saved - eps;
      const double minus = evaluate(f, k, i);
      values[i] = saved;
      const double numeric = (plus - minus) / (2.0 * eps);
      const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

double grad_check(const std::function<Tensor()>& f, Tensor theta, double eps) {
  return grad_check(f, std::vector<Tensor>{std::move(theta)}, eps);
}

}  // namespace mre
