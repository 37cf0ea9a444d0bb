#include "hatelab/layers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hatelab::nn {
namespace {

template <typename T>
void fill_uniform(Matrix<T>& m, double limit, Rng& rng) {
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(dist(rng));
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

template <typename T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

}  // namespace

// --- dense -----------------------------------------------------------------

template <typename T>
DenseLayer<T> make_dense(const std::string& name, Eigen::Index in, Eigen::Index out, Rng& rng) {
  require(in > 0 && out > 0, "dense: dimensions must be positive");
  DenseLayer<T> layer{Param<T>(name + ".weight", out, in), Param<T>(name + ".bias", 1, out)};
  fill_uniform(layer.weight.value, std::sqrt(6.0 / static_cast<double>(in + out)), rng);
  return layer;
}

template <typename T>
Matrix<T> dense_forward(const DenseLayer<T>& layer, const Matrix<T>& x) {
  require(x.cols() == layer.input_dim(), "dense: input width does not match weights");
  Matrix<T> y = x * layer.weight.value.transpose();
  y.rowwise() += layer.bias.value.row(0);
  return y;
}

template <typename T>
Matrix<T> dense_backward(DenseLayer<T>& layer, const Matrix<T>& x, const Matrix<T>& grad_out) {
  require(grad_out.rows() == x.rows() && grad_out.cols() == layer.output_dim(),
          "dense: gradient shape mismatch");
  layer.weight.grad.noalias() += grad_out.transpose() * x;
  layer.bias.grad.row(0) += grad_out.colwise().sum();
  return grad_out * layer.weight.value;
}

// --- conv1d ----------------------------------------------------------------

std::size_t conv_output_length(std::size_t n, std::size_t window, std::size_t stride) {
  if (window == 0 || stride == 0) throw std::invalid_argument("conv: window and stride must be positive");
  if (n < window) return 0;
  return (n - window) / stride + 1;
}

template <typename T>
FilterBank<T> make_filter_bank(const std::string& name, Eigen::Index window, Eigen::Index in_dim,
                               Eigen::Index filters, Rng& rng) {
  require(window >= 1 && in_dim >= 1 && filters >= 1, "conv: dimensions must be positive");
  FilterBank<T> bank{Param<T>(name + ".weight", filters, window * in_dim),
                     Param<T>(name + ".bias", 1, filters), window, in_dim};
  const double fan_in = static_cast<double>(window * in_dim);
  const double fan_out = static_cast<double>(window * filters);
  fill_uniform(bank.weight.value, std::sqrt(6.0 / (fan_in + fan_out)), rng);
  return bank;
}

template <typename T>
Matrix<T> conv1d_forward(const FilterBank<T>& bank, const Matrix<T>& seq, Eigen::Index stride) {
  require(seq.cols() == bank.in_dim, "conv: input width does not match filter bank");
  require(seq.rows() >= bank.window, "conv: sequence shorter than window");
  const auto out_len = static_cast<Eigen::Index>(conv_output_length(
      static_cast<std::size_t>(seq.rows()), static_cast<std::size_t>(bank.window),
      static_cast<std::size_t>(stride)));
  // Window r starts at row r*stride; the patch matrix is a strided view.
  Eigen::Map<const Matrix<T>, 0, Eigen::OuterStride<>> patches(
      seq.data(), out_len, bank.window * bank.in_dim, Eigen::OuterStride<>(stride * bank.in_dim));
  Matrix<T> out = patches * bank.weight.value.transpose();
  out.rowwise() += bank.bias.value.row(0);
  return out;
}

template <typename T>
Matrix<T> conv1d_backward(FilterBank<T>& bank, const Matrix<T>& seq, Eigen::Index stride,
                          const Matrix<T>& grad_out) {
  const Eigen::Index out_len = grad_out.rows();
  const Eigen::Index width = bank.window * bank.in_dim;
  require(grad_out.cols() == bank.filters(), "conv: gradient width mismatch");
  Eigen::Map<const Matrix<T>, 0, Eigen::OuterStride<>> patches(
      seq.data(), out_len, width, Eigen::OuterStride<>(stride * bank.in_dim));
  bank.weight.grad.noalias() += grad_out.transpose() * patches;
  bank.bias.grad.row(0) += grad_out.colwise().sum();

  const Matrix<T> grad_patches = grad_out * bank.weight.value;
  Matrix<T> grad_seq = Matrix<T>::Zero(seq.rows(), seq.cols());
  for (Eigen::Index r = 0; r < out_len; ++r) {
    Eigen::Map<RowVector<T>> dst(grad_seq.data() + r * stride * bank.in_dim, width);
    dst += grad_patches.row(r);
  }
  return grad_seq;
}

// --- max pooling -----------------------------------------------------------

std::size_t pool_output_length(std::size_t len, std::size_t pool, std::size_t stride) {
  return conv_output_length(len, pool, stride);
}

template <typename T>
PoolResult<T> maxpool1d_forward(const Matrix<T>& map, Eigen::Index pool, Eigen::Index stride) {
  require(pool >= 1 && stride >= 1, "pool: size and stride must be positive");
  require(map.rows() >= pool, "pool: feature map shorter than pool size");
  const auto out_len = static_cast<Eigen::Index>(pool_output_length(
      static_cast<std::size_t>(map.rows()), static_cast<std::size_t>(pool),
      static_cast<std::size_t>(stride)));
  PoolResult<T> res;
  res.input_rows = map.rows();
  res.output.resize(out_len, map.cols());
  res.argmax.resize(static_cast<std::size_t>(out_len * map.cols()));
  for (Eigen::Index o = 0; o < out_len; ++o) {
    const Eigen::Index start = o * stride;
    for (Eigen::Index c = 0; c < map.cols(); ++c) {
      Eigen::Index best = start;
      for (Eigen::Index r = start + 1; r < start + pool; ++r)
        if (map(r, c) > map(best, c)) best = r;
      res.output(o, c) = map(best, c);
      res.argmax[static_cast<std::size_t>(o * map.cols() + c)] = best;
    }
  }
  return res;
}

template <typename T>
Matrix<T> maxpool1d_backward(const PoolResult<T>& forward, const Matrix<T>& grad_out) {
  require(grad_out.rows() == forward.output.rows() && grad_out.cols() == forward.output.cols(),
          "pool: gradient shape mismatch");
  Matrix<T> grad_in = Matrix<T>::Zero(forward.input_rows, grad_out.cols());
  for (Eigen::Index o = 0; o < grad_out.rows(); ++o)
    for (Eigen::Index c = 0; c < grad_out.cols(); ++c)
      grad_in(forward.argmax[static_cast<std::size_t>(o * grad_out.cols() + c)], c) +=
          grad_out(o, c);
  return grad_in;
}

// --- activations -------------------------------------------------------------

template <typename T>
Matrix<T> relu_forward(const Matrix<T>& x) {
  return x.cwiseMax(T(0));
}

template <typename T>
Matrix<T> relu_backward(const Matrix<T>& x, const Matrix<T>& grad_out) {
  return (x.array() > T(0)).select(grad_out, T(0));
}

// --- LSTM ------------------------------------------------------------------

template <typename T>
LstmLayer<T> make_lstm(const std::string& name, Eigen::Index in, Eigen::Index hidden, Rng& rng) {
  require(in >= 1 && hidden >= 1, "lstm: dimensions must be positive");
  LstmLayer<T> layer{Param<T>(name + ".weight", 4 * hidden, in + hidden),
                     Param<T>(name + ".bias", 1, 4 * hidden), in, hidden};
  fill_uniform(layer.weight.value, 1.0 / std::sqrt(static_cast<double>(hidden)), rng);
  layer.bias.value.block(0, hidden, 1, hidden).setConstant(T(1));
  return layer;
}

template <typename T>
LstmCache<T> lstm_forward(const LstmLayer<T>& layer, const std::vector<Matrix<T>>& xs) {
  const Eigen::Index H = layer.hidden;
  const Eigen::Index in = layer.input_dim;
  LstmCache<T> cache;
  if (xs.empty()) return cache;
  const Eigen::Index batch = xs.front().rows();
  const std::size_t steps = xs.size();
  cache.joint.resize(steps);
  cache.gates.resize(steps);
  cache.cell.resize(steps);
  cache.cell_tanh.resize(steps);
  cache.hidden.resize(steps);

  Matrix<T> h = Matrix<T>::Zero(batch, H);
  Matrix<T> c = Matrix<T>::Zero(batch, H);
  for (std::size_t t = 0; t < steps; ++t) {
    require(xs[t].rows() == batch && xs[t].cols() == in, "lstm: input shape mismatch");
    Matrix<T>& joint = cache.joint[t];
    joint.resize(batch, in + H);
    joint.leftCols(in) = xs[t];
    joint.rightCols(H) = h;

    Matrix<T>& gates = cache.gates[t];
    gates.noalias() = joint * layer.weight.value.transpose();
    gates.rowwise() += layer.bias.value.row(0);
    gates.leftCols(3 * H) = gates.leftCols(3 * H).unaryExpr([](T v) { return sigmoid(v); });
    gates.rightCols(H) = gates.rightCols(H).array().tanh().matrix();

    c = (gates.middleCols(H, H).array() * c.array() +
         gates.leftCols(H).array() * gates.rightCols(H).array())
            .matrix();
    cache.cell[t] = c;
    cache.cell_tanh[t] = c.array().tanh().matrix();
    h = (gates.middleCols(2 * H, H).array() * cache.cell_tanh[t].array()).matrix();
    cache.hidden[t] = h;
  }
  return cache;
}

template <typename T>
std::vector<Matrix<T>> lstm_backward(LstmLayer<T>& layer, const LstmCache<T>& cache,
                                     const std::vector<Matrix<T>>& grad_hidden) {
  const Eigen::Index H = layer.hidden;
  const Eigen::Index in = layer.input_dim;
  const std::size_t steps = cache.hidden.size();
  require(grad_hidden.size() == steps, "lstm: gradient step count mismatch");
  std::vector<Matrix<T>> grad_x(steps);
  if (steps == 0) return grad_x;
  const Eigen::Index batch = cache.hidden.front().rows();

  Matrix<T> dh_next = Matrix<T>::Zero(batch, H);
  Matrix<T> dc_next = Matrix<T>::Zero(batch, H);
  Matrix<T> dgates(batch, 4 * H);
  for (std::size_t step = steps; step-- > 0;) {
    const Matrix<T>& gates = cache.gates[step];
    const auto i = gates.leftCols(H).array();
    const auto f = gates.middleCols(H, H).array();
    const auto o = gates.middleCols(2 * H, H).array();
    const auto g = gates.rightCols(H).array();
    const auto tc = cache.cell_tanh[step].array();

    Matrix<T> dh = dh_next;
    if (grad_hidden[step].size() != 0) dh += grad_hidden[step];
    const auto dh_a = dh.array();

    Matrix<T> dc = (dc_next.array() + dh_a * o * (T(1) - tc.square())).matrix();
    const auto dc_a = dc.array();

    dgates.leftCols(H) = (dc_a * g * i * (T(1) - i)).matrix();
    if (step > 0) {
      dgates.middleCols(H, H) = (dc_a * cache.cell[step - 1].array() * f * (T(1) - f)).matrix();
    } else {
      dgates.middleCols(H, H).setZero();
    }
    dgates.middleCols(2 * H, H) = (dh_a * tc * o * (T(1) - o)).matrix();
    dgates.rightCols(H) = (dc_a * i * (T(1) - g.square())).matrix();

    dc_next = (dc_a * f).matrix();

    layer.weight.grad.noalias() += dgates.transpose() * cache.joint[step];
    layer.bias.grad.row(0) += dgates.colwise().sum();
    const Matrix<T> djoint = dgates * layer.weight.value;
    grad_x[step] = djoint.leftCols(in);
    dh_next = djoint.rightCols(H);
  }
  return grad_x;
}

template <typename T>
BiLstmCache<T> bilstm_forward(const LstmLayer<T>& fwd, const LstmLayer<T>& bwd,
                              const std::vector<Matrix<T>>& xs) {
  require(fwd.hidden == bwd.hidden, "bilstm: directions must share hidden size");
  BiLstmCache<T> cache;
  cache.forward = lstm_forward(fwd, xs);
  const std::vector<Matrix<T>> reversed(xs.rbegin(), xs.rend());
  cache.backward = lstm_forward(bwd, reversed);
  const std::size_t steps = xs.size();
  const Eigen::Index H = fwd.hidden;
  cache.outputs.resize(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    Matrix<T>& out = cache.outputs[t];
    out.resize(xs[t].rows(), 2 * H);
    out.leftCols(H) = cache.forward.hidden[t];
    out.rightCols(H) = cache.backward.hidden[steps - 1 - t];
  }
  return cache;
}

template <typename T>
std::vector<Matrix<T>> bilstm_backward(LstmLayer<T>& fwd, LstmLayer<T>& bwd,
                                       const BiLstmCache<T>& cache,
                                       const std::vector<Matrix<T>>& grad_outputs) {
  const std::size_t steps = cache.outputs.size();
  require(grad_outputs.size() == steps, "bilstm: gradient step count mismatch");
  const Eigen::Index H = fwd.hidden;
  std::vector<Matrix<T>> grad_fwd(steps), grad_bwd(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    if (grad_outputs[t].size() == 0) continue;
    grad_fwd[t] = grad_outputs[t].leftCols(H);
    grad_bwd[steps - 1 - t] = grad_outputs[t].rightCols(H);
  }
  std::vector<Matrix<T>> dx = lstm_backward(fwd, cache.forward, grad_fwd);
  const std::vector<Matrix<T>> dx_rev = lstm_backward(bwd, cache.backward, grad_bwd);
  for (std::size_t t = 0; t < steps; ++t) dx[t] += dx_rev[steps - 1 - t];
  return dx;
}

// --- dropout -----------------------------------------------------------------

template <typename T>
Matrix<T> dropout_apply(const Matrix<T>& x, double rate, Mode mode, Rng& rng, Matrix<T>* mask) {
  require(rate >= 0.0 && rate < 1.0, "dropout: rate must lie in [0, 1)");
  if (mask) mask->resize(0, 0);
  if (mode == Mode::kInference || rate == 0.0) return x;
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Matrix<T> m(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < m.size(); ++i)
    m.data()[i] = uniform(rng) < rate ? T(0) : keep_scale;
  Matrix<T> out = x.cwiseProduct(m);
  if (mask) *mask = std::move(m);
  return out;
}

// --- softmax cross-entropy -------------------------------------------------

template <typename T>
RowVector<T> softmax(const RowVector<T>& logits) {
  const T shift = logits.maxCoeff();
  RowVector<T> e = (logits.array() - shift).exp().matrix();
  return e / e.sum();
}

template <typename T>
XentResult<T> softmax_xent(const RowVector<T>& logits, std::size_t gold) {
  require(gold < static_cast<std::size_t>(logits.size()), "xent: gold class out of range");
  require(logits.allFinite(), "xent: non-finite logits");
  const double shift = static_cast<double>(logits.maxCoeff());
  double sum = 0.0;
  for (Eigen::Index j = 0; j < logits.size(); ++j)
    sum += std::exp(static_cast<double>(logits(j)) - shift);
  const double log_z = shift + std::log(sum);
  XentResult<T> res;
  res.loss = log_z - static_cast<double>(logits(static_cast<Eigen::Index>(gold)));
  res.probs.resize(logits.size());
  for (Eigen::Index j = 0; j < logits.size(); ++j)
    res.probs(j) = static_cast<T>(std::exp(static_cast<double>(logits(j)) - log_z));
  res.grad = res.probs;
  res.grad(static_cast<Eigen::Index>(gold)) -= T(1);
  return res;
}

template <typename T>
BatchXent<T> softmax_xent_batch(const Matrix<T>& logits, std::span<const std::int32_t> golds) {
  require(static_cast<std::size_t>(logits.rows()) == golds.size(), "xent: batch size mismatch");
  BatchXent<T> res;
  res.grad.resize(logits.rows(), logits.cols());
  const T inv = static_cast<T>(1.0 / static_cast<double>(std::max<Eigen::Index>(1, logits.rows())));
  for (Eigen::Index b = 0; b < logits.rows(); ++b) {
    const auto row = softmax_xent<T>(logits.row(b), static_cast<std::size_t>(golds[b]));
    res.mean_loss += row.loss;
    res.grad.row(b) = row.grad * inv;
  }
  if (logits.rows() > 0) res.mean_loss /= static_cast<double>(logits.rows());
  return res;
}

#define HATELAB_INSTANTIATE_LAYERS(T)                                                        \
  template DenseLayer<T> make_dense<T>(const std::string&, Eigen::Index, Eigen::Index, Rng&); \
  template Matrix<T> dense_forward<T>(const DenseLayer<T>&, const Matrix<T>&);               \
  template Matrix<T> dense_backward<T>(DenseLayer<T>&, const Matrix<T>&, const Matrix<T>&);  \
  template FilterBank<T> make_filter_bank<T>(const std::string&, Eigen::Index, Eigen::Index,  \
                                             Eigen::Index, Rng&);                            \
  template Matrix<T> conv1d_forward<T>(const FilterBank<T>&, const Matrix<T>&, Eigen::Index); \
  template Matrix<T> conv1d_backward<T>(FilterBank<T>&, const Matrix<T>&, Eigen::Index,       \
                                        const Matrix<T>&);                                   \
  template PoolResult<T> maxpool1d_forward<T>(const Matrix<T>&, Eigen::Index, Eigen::Index);  \
  template Matrix<T> maxpool1d_backward<T>(const PoolResult<T>&, const Matrix<T>&);          \
  template Matrix<T> relu_forward<T>(const Matrix<T>&);                                      \
  template Matrix<T> relu_backward<T>(const Matrix<T>&, const Matrix<T>&);                   \
  template LstmLayer<T> make_lstm<T>(const std::string&, Eigen::Index, Eigen::Index, Rng&);   \
  template LstmCache<T> lstm_forward<T>(const LstmLayer<T>&, const std::vector<Matrix<T>>&);  \
  template std::vector<Matrix<T>> lstm_backward<T>(LstmLayer<T>&, const LstmCache<T>&,        \
                                                   const std::vector<Matrix<T>>&);           \
  template BiLstmCache<T> bilstm_forward<T>(const LstmLayer<T>&, const LstmLayer<T>&,         \
                                            const std::vector<Matrix<T>>&);                  \
  template std::vector<Matrix<T>> bilstm_backward<T>(LstmLayer<T>&, LstmLayer<T>&,            \
                                                     const BiLstmCache<T>&,                  \
                                                     const std::vector<Matrix<T>>&);         \
  template Matrix<T> dropout_apply<T>(const Matrix<T>&, double, Mode, Rng&, Matrix<T>*);      \
  template RowVector<T> softmax<T>(const RowVector<T>&);                                     \
  template XentResult<T> softmax_xent<T>(const RowVector<T>&, std::size_t);                   \
  template BatchXent<T> softmax_xent_batch<T>(const Matrix<T>&, std::span<const std::int32_t>);

HATELAB_INSTANTIATE_LAYERS(float)
HATELAB_INSTANTIATE_LAYERS(double)

}  // namespace hatelab::nn
