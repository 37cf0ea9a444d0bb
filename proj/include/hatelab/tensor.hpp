#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

namespace hatelab {

/// Row-major dense matrix. Batched activations are laid out one example per
/// row; sequences one time step per row.
template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic>;

/// A trainable tensor together with its accumulated gradient.
template <typename T>
struct Param {
  std::string name;
  Matrix<T> value;
  Matrix<T> grad;

  Param() = default;
  Param(std::string param_name, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(param_name)),
        value(Matrix<T>::Zero(rows, cols)),
        grad(Matrix<T>::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(); }
};

}  // namespace hatelab
