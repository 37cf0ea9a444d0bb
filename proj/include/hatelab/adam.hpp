#pragma once

#include "hatelab/tensor.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace hatelab::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
  AdamConfig hyper;
  std::vector<Matrix<T>> m;
  std::vector<Matrix<T>> v;
  std::int64_t t = 0;
};

/// One bias-corrected Adam update of every parameter from its accumulated
/// gradient. Moment buffers are created on the first call.
template <typename T>
void adam_step(std::span<Param<T>* const> params, AdamState<T>& state);

}  // namespace hatelab::nn
