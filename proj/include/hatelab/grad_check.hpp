#pragma once

#include "hatelab/tensor.hpp"

#include <functional>
#include <span>

namespace hatelab::nn {

/// Differences below this magnitude are compared absolutely rather than
/// relatively, so components whose true gradient is ~0 do not blow up.
inline constexpr double kRelativeErrorFloor = 1e-6;

double relative_error(double analytic, double numeric);

/// Central differences (f(x+eps) - f(x-eps)) / 2eps of `loss` with respect to
/// each entry of `x` (restored afterwards), compared with `analytic`.
/// Returns the worst relative error. `indices` restricts the check to the
/// listed flat (row-major) positions; empty means every entry.
double grad_check(const std::function<double()>& loss, Matrix<double>& x,
                  const Matrix<double>& analytic, double eps = 1e-5,
                  std::span<const Eigen::Index> indices = {});

}  // namespace hatelab::nn
