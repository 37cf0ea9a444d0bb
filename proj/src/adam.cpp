#include "hatelab/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace hatelab::nn {

template <typename T>
void adam_step(std::span<Param<T>* const> params, AdamState<T>& state) {
  if (state.m.empty()) {
    for (const Param<T>* p : params) {
      state.m.push_back(Matrix<T>::Zero(p->value.rows(), p->value.cols()));
      state.v.push_back(Matrix<T>::Zero(p->value.rows(), p->value.cols()));
    }
  }
  if (state.m.size() != params.size()) throw std::invalid_argument("adam: parameter count changed");

  ++state.t;
  const AdamConfig& h = state.hyper;
  const double step = static_cast<double>(state.t);
  const T b1 = static_cast<T>(h.beta1);
  const T b2 = static_cast<T>(h.beta2);
  const T correction1 = static_cast<T>(1.0 - std::pow(h.beta1, step));
  const T correction2 = static_cast<T>(1.0 - std::pow(h.beta2, step));
  const T lr = static_cast<T>(h.lr);
  const T eps = static_cast<T>(h.epsilon);

  for (std::size_t k = 0; k < params.size(); ++k) {
    Param<T>& p = *params[k];
    Matrix<T>& m = state.m[k];
    Matrix<T>& v = state.v[k];
    if (m.rows() != p.value.rows() || m.cols() != p.value.cols() ||
        p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols()) {
      throw std::invalid_argument("adam: shape mismatch for " + p.name);
    }
    T* w = p.value.data();
    const T* g = p.grad.data();
    T* mp = m.data();
    T* vp = v.data();
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      mp[i] = b1 * mp[i] + (T(1) - b1) * g[i];
      vp[i] = b2 * vp[i] + (T(1) - b2) * g[i] * g[i];
      const T m_hat = mp[i] / correction1;
      const T v_hat = vp[i] / correction2;
      w[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

template void adam_step<float>(std::span<Param<float>* const>, AdamState<float>&);
template void adam_step<double>(std::span<Param<double>* const>, AdamState<double>&);

}  // namespace hatelab::nn
