#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qa/autodiff.hpp"

namespace qa {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction. Moment buffers are bound to the parameter list
/// given at construction; the same list, in the same order, must be passed to
/// every step().
class Adam {
 public:
  Adam(std::span<ParamTensor* const> params, AdamOptions options = {});

  void step(std::span<ParamTensor* const> params);

  std::uint64_t step_count() const noexcept { return steps_; }
  const AdamOptions& options() const noexcept { return options_; }

 private:
  AdamOptions options_;
  std::vector<Matrix> first_;
  std::vector<Matrix> second_;
  std::uint64_t steps_ = 0;
};

/// Central-difference gradient of a scalar function of the parameters:
/// (f(θ + ε·eᵢ) − f(θ − ε·eᵢ)) / 2ε for every scalar entry. Parameter values are
/// restored before returning. One matrix per parameter, in input order.
std::vector<Matrix> finite_diff_grad(const std::function<double()>& f,
                                     std::span<ParamTensor* const> params, double epsilon);

}  // namespace qa
