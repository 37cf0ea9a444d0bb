#pragma once

#include "hatelab/random.hpp"
#include "hatelab/tensor.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

// Layers are plain parameter records plus free forward/backward functions.
// Forward functions never mutate parameters; backward functions accumulate
// into Param::grad and return the gradient with respect to their input.
namespace hatelab::nn {

// ---------------------------------------------------------------------------
// Fully connected

template <typename T>
struct DenseLayer {
  Param<T> weight;  // out x in
  Param<T> bias;    // 1 x out

  Eigen::Index input_dim() const { return weight.value.cols(); }
  Eigen::Index output_dim() const { return weight.value.rows(); }
};

/// Glorot-uniform weights, zero bias.
template <typename T>
DenseLayer<T> make_dense(const std::string& name, Eigen::Index in, Eigen::Index out, Rng& rng);

/// x: batch x in  ->  batch x out, y = x W^T + b.
template <typename T>
Matrix<T> dense_forward(const DenseLayer<T>& layer, const Matrix<T>& x);

template <typename T>
Matrix<T> dense_backward(DenseLayer<T>& layer, const Matrix<T>& x, const Matrix<T>& grad_out);

// ---------------------------------------------------------------------------
// 1-D convolution over a sequence (rows = positions, cols = features)

template <typename T>
struct FilterBank {
  Param<T> weight;  // filters x (window * in_dim); row f holds filter f's window, position-major
  Param<T> bias;    // 1 x filters
  Eigen::Index window = 1;
  Eigen::Index in_dim = 1;

  Eigen::Index filters() const { return weight.value.rows(); }
};

template <typename T>
FilterBank<T> make_filter_bank(const std::string& name, Eigen::Index window, Eigen::Index in_dim,
                               Eigen::Index filters, Rng& rng);

/// floor((n - window) / stride) + 1; 0 when n < window.
std::size_t conv_output_length(std::size_t n, std::size_t window, std::size_t stride);

/// seq: n x in_dim  ->  out_len x filters. Valid convolution, no padding.
template <typename T>
Matrix<T> conv1d_forward(const FilterBank<T>& bank, const Matrix<T>& seq, Eigen::Index stride);

template <typename T>
Matrix<T> conv1d_backward(FilterBank<T>& bank, const Matrix<T>& seq, Eigen::Index stride,
                          const Matrix<T>& grad_out);

// ---------------------------------------------------------------------------
// Max pooling along rows, independently per column

std::size_t pool_output_length(std::size_t len, std::size_t pool, std::size_t stride);

template <typename T>
struct PoolResult {
  Matrix<T> output;
  std::vector<Eigen::Index> argmax;  // source row per output cell, row-major
  Eigen::Index input_rows = 0;
};

/// Ties resolve to the earliest row.
template <typename T>
PoolResult<T> maxpool1d_forward(const Matrix<T>& map, Eigen::Index pool, Eigen::Index stride);

/// Pool size equal to the map length: one maximum per column.
template <typename T>
PoolResult<T> global_maxpool_forward(const Matrix<T>& map) {
  return maxpool1d_forward(map, map.rows(), map.rows());
}

template <typename T>
Matrix<T> maxpool1d_backward(const PoolResult<T>& forward, const Matrix<T>& grad_out);

// ---------------------------------------------------------------------------
// Elementwise activations

template <typename T>
Matrix<T> relu_forward(const Matrix<T>& x);

/// Gradient through relu given the pre-activation input.
template <typename T>
Matrix<T> relu_backward(const Matrix<T>& x, const Matrix<T>& grad_out);

// ---------------------------------------------------------------------------
// LSTM

/// Gates are stacked row-wise in the order input, forget, output, cell;
/// each block acts on [x_t ; h_{t-1}].
template <typename T>
struct LstmLayer {
  Param<T> weight;  // 4H x (in + H)
  Param<T> bias;    // 1 x 4H
  Eigen::Index input_dim = 0;
  Eigen::Index hidden = 0;
};

/// Weights uniform in +-1/sqrt(H); forget-gate bias 1, other biases 0.
template <typename T>
LstmLayer<T> make_lstm(const std::string& name, Eigen::Index in, Eigen::Index hidden, Rng& rng);

template <typename T>
struct LstmCache {
  std::vector<Matrix<T>> joint;      // [x_t ; h_{t-1}], batch x (in + H)
  std::vector<Matrix<T>> gates;      // activated i, f, o, g, batch x 4H
  std::vector<Matrix<T>> cell;       // c_t
  std::vector<Matrix<T>> cell_tanh;  // tanh(c_t)
  std::vector<Matrix<T>> hidden;     // h_t
};

/// xs[t]: batch x in. h_0 = c_0 = 0.
template <typename T>
LstmCache<T> lstm_forward(const LstmLayer<T>& layer, const std::vector<Matrix<T>>& xs);

/// Full backpropagation through time. grad_hidden[t] is dL/dh_t from outside
/// the recurrence (may be zero-sized for steps without external gradient).
/// Returns dL/dx_t for every step.
template <typename T>
std::vector<Matrix<T>> lstm_backward(LstmLayer<T>& layer, const LstmCache<T>& cache,
                                     const std::vector<Matrix<T>>& grad_hidden);

template <typename T>
struct BiLstmCache {
  LstmCache<T> forward;
  LstmCache<T> backward;             // over the reversed sequence
  std::vector<Matrix<T>> outputs;    // [h_t^fwd ; h_t^bwd], batch x 2H
};

template <typename T>
BiLstmCache<T> bilstm_forward(const LstmLayer<T>& fwd, const LstmLayer<T>& bwd,
                              const std::vector<Matrix<T>>& xs);

template <typename T>
std::vector<Matrix<T>> bilstm_backward(LstmLayer<T>& fwd, LstmLayer<T>& bwd,
                                       const BiLstmCache<T>& cache,
                                       const std::vector<Matrix<T>>& grad_outputs);

// ---------------------------------------------------------------------------
// Dropout

enum class Mode { kTraining, kInference };

/// Inverted dropout. In training mode each component is zeroed with
/// probability `rate` and survivors are scaled by 1/(1-rate). `mask`, when
/// given, receives the per-component multiplier (empty for identity).
template <typename T>
Matrix<T> dropout_apply(const Matrix<T>& x, double rate, Mode mode, Rng& rng,
                        Matrix<T>* mask = nullptr);

template <typename T>
Matrix<T> dropout_apply(const Matrix<T>& x, double rate, Mode mode, std::uint64_t seed) {
  Rng rng(seed);
  return dropout_apply(x, rate, mode, rng);
}

// ---------------------------------------------------------------------------
// Softmax cross-entropy

template <typename T>
RowVector<T> softmax(const RowVector<T>& logits);

template <typename T>
struct XentResult {
  double loss = 0.0;
  RowVector<T> grad;
  RowVector<T> probs;
};

/// loss = -ln p_gold with log-sum-exp stabilisation; grad = p - onehot(gold).
template <typename T>
XentResult<T> softmax_xent(const RowVector<T>& logits, std::size_t gold);

template <typename T>
struct BatchXent {
  double mean_loss = 0.0;
  Matrix<T> grad;  // already divided by the batch size
};

template <typename T>
BatchXent<T> softmax_xent_batch(const Matrix<T>& logits, std::span<const std::int32_t> golds);

}  // namespace hatelab::nn
