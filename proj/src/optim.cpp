#include "qa/optim.hpp"

#include <cmath>

#include "qa/error.hpp"

namespace qa {

Adam::Adam(std::span<ParamTensor* const> params, AdamOptions options) : options_(options) {
  for (const ParamTensor* p : params) {
    first_.emplace_back(p->value.rows(), p->value.cols());
    second_.emplace_back(p->value.rows(), p->value.cols());
  }
}

void Adam::step(std::span<ParamTensor* const> params) {
  if (params.size() != first_.size()) {
    throw Error("shape", "adam: parameter list changed between steps");
  }
  ++steps_;
  const auto& o = options_;
  const double correction1 = 1.0 - std::pow(o.beta1, static_cast<double>(steps_));
  const double correction2 = 1.0 - std::pow(o.beta2, static_cast<double>(steps_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto value = params[k]->value.values();
    auto grad = params[k]->grad.values();
    auto m = first_[k].values();
    auto v = second_[k].values();
    if (value.size() != m.size()) throw Error("shape", "adam: moment shape mismatch for " + params[k]->name);
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * grad[i];
      v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * grad[i] * grad[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      value[i] -= o.learning_rate * m_hat / (std::sqrt(v_hat) + o.epsilon);
    }
  }
}

std::vector<Matrix> finite_diff_grad(const std::function<double()>& f,
                                     std::span<ParamTensor* const> params, double epsilon) {
  std::vector<Matrix> grads;
  grads.reserve(params.size());
  for (ParamTensor* p : params) {
    Matrix g(p->value.rows(), p->value.cols());
    auto values = p->value.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + epsilon;
      const double up = f();
      values[i] = saved - epsilon;
      const double down = f();
      values[i] = saved;
      g.values()[i] = (up - down) / (2.0 * epsilon);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

}  // namespace qa
