#include "hatelab/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hatelab::nn {

double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), kRelativeErrorFloor});
  return std::abs(analytic - numeric) / scale;
}

double grad_check(const std::function<double()>& loss, Matrix<double>& x,
                  const Matrix<double>& analytic, double eps,
                  std::span<const Eigen::Index> indices) {
  if (x.rows() != analytic.rows() || x.cols() != analytic.cols()) {
    throw std::invalid_argument("grad_check: analytic gradient shape mismatch");
  }
  double worst = 0.0;
  auto check_one = [&](Eigen::Index i) {
    double& slot = x.data()[i];
    const double saved = slot;
    slot = saved + eps;
    const double up = loss();
    slot = saved - eps;
    const double down = loss();
    slot = saved;
    const double numeric = (up - down) / (2.0 * eps);
    worst = std::max(worst, relative_error(analytic.data()[i], numeric));
  };
  if (indices.empty()) {
    for (Eigen::Index i = 0; i < x.size(); ++i) check_one(i);
  } else {
    for (Eigen::Index i : indices) {
      if (i < 0 || i >= x.size()) throw std::out_of_range("grad_check: index out of range");
      check_one(i);
    }
  }
  return worst;
}

}  // namespace hatelab::nn
