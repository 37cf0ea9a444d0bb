#include "hatelab/model.hpp"

#include "hatelab/data.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <stdexcept>

namespace hatelab {

std::string arch_name(Arch arch) {
  switch (arch) {
    case Arch::kCnn: return "cnn";
    case Arch::kLstm: return "lstm";
    case Arch::kBiLstm: return "bilstm";
    case Arch::kCharCnn: return "charcnn";
    case Arch::kLstmCharCnn: return "lstm+charcnn";
    case Arch::kBiLstmCharCnn: return "bilstm+charcnn";
  }
  return "unknown";
}

Arch parse_arch(std::string_view name) {
  for (Arch a : {Arch::kCnn, Arch::kLstm, Arch::kBiLstm, Arch::kCharCnn, Arch::kLstmCharCnn,
                 Arch::kBiLstmCharCnn}) {
    if (arch_name(a) == name) return a;
  }
  throw std::invalid_argument("unknown arch '" + std::string(name) + "'");
}

bool uses_words(Arch arch) { return arch != Arch::kCharCnn; }
bool uses_chars(Arch arch) {
  return arch == Arch::kCharCnn || arch == Arch::kLstmCharCnn || arch == Arch::kBiLstmCharCnn;
}
bool is_recurrent(Arch arch) {
  return arch == Arch::kLstm || arch == Arch::kBiLstm || arch == Arch::kLstmCharCnn ||
         arch == Arch::kBiLstmCharCnn;
}
bool is_bidirectional(Arch arch) { return arch == Arch::kBiLstm || arch == Arch::kBiLstmCharCnn; }

void ModelConfig::validate() const {
  std::vector<std::string> problems;
  if (classes < 2) problems.push_back("classes must be >= 2");
  if (max_len < 1) problems.push_back("max_len must be positive");
  if (hidden < 1) problems.push_back("hidden must be positive");
  if (filters < 1) problems.push_back("filters must be positive");
  if (char_filters < 1) problems.push_back("char_filters must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) problems.push_back("dropout must lie in [0, 1)");
  if (batch < 1) problems.push_back("batch must be positive");
  if (epochs < 1) problems.push_back("epochs must be positive");
  if (!(lr > 0.0)) problems.push_back("lr must be positive");
  if (min_freq < 1) problems.push_back("min_freq must be positive");
  if (uses_words(arch) && embedding.dim < 1) problems.push_back("embedding dim must be positive");
  if (arch == Arch::kCnn) {
    if (windows.empty()) problems.push_back("windows must not be empty");
    for (std::size_t w : windows) {
      if (w < 1) problems.push_back("windows must be positive");
      else if (w > max_len) problems.push_back("window " + std::to_string(w) + " exceeds max_len");
    }
  }
  if (!problems.empty()) {
    std::string msg = "invalid model config:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw std::invalid_argument(msg);
  }
}

nlohmann::json config_to_json(const ModelConfig& c) {
  return nlohmann::json{
      {"name", c.name},
      {"arch", arch_name(c.arch)},
      {"embedding", {{"kind", c.embedding.kind}, {"path", c.embedding.path.string()},
                     {"dim", c.embedding.dim}}},
      {"max_len", c.max_len},
      {"hidden", c.hidden},
      {"windows", c.windows},
      {"filters", c.filters},
      {"char_filters", c.char_filters},
      {"dropout", c.dropout},
      {"batch", c.batch},
      {"epochs", c.epochs},
      {"lr", c.lr},
      {"seed", c.seed},
      {"classes", c.classes},
      {"min_freq", c.min_freq},
  };
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  if (j.contains("preset")) {
    const auto& preset = j.at("preset");
    c = preset_config(preset.is_number() ? std::to_string(preset.get<int>())
                                         : preset.get<std::string>());
  }
  if (j.contains("name")) c.name = j.at("name").get<std::string>();
  if (j.contains("arch")) c.arch = parse_arch(j.at("arch").get<std::string>());
  if (j.contains("embedding")) {
    const auto& e = j.at("embedding");
    if (e.contains("kind")) c.embedding.kind = e.at("kind").get<std::string>();
    if (e.contains("path")) c.embedding.path = e.at("path").get<std::string>();
    if (e.contains("dim")) c.embedding.dim = e.at("dim").get<std::size_t>();
    if (!c.embedding.path.empty() && !e.contains("kind")) c.embedding.kind = "pretrained";
  }
  auto read = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  read("max_len", c.max_len);
  read("hidden", c.hidden);
  read("windows", c.windows);
  read("filters", c.filters);
  read("char_filters", c.char_filters);
  read("dropout", c.dropout);
  read("batch", c.batch);
  read("epochs", c.epochs);
  read("lr", c.lr);
  read("seed", c.seed);
  read("classes", c.classes);
  read("min_freq", c.min_freq);
  return c;
}

std::vector<ModelConfig> preset_configs() {
  struct Row {
    const char* name;
    Arch arch;
    const char* kind;
    std::size_t dim;
  };
  static const Row rows[] = {
      {"CNN(W2V)", Arch::kCnn, "w2v", 300},
      {"LSTM(W2V)", Arch::kLstm, "w2v", 300},
      {"BiLSTM(W2V)", Arch::kBiLstm, "w2v", 300},
      {"CNN(Glove)", Arch::kCnn, "glove", 100},
      {"LSTM(Glove)", Arch::kLstm, "glove", 100},
      {"BiLSTM(Glove)", Arch::kBiLstm, "glove", 100},
      {"CNN(Fasttext)", Arch::kCnn, "fasttext", 300},
      {"LSTM(Fasttext)", Arch::kLstm, "fasttext", 300},
      {"BiLSTM(Fasttext)", Arch::kBiLstm, "fasttext", 300},
      {"CharCNN", Arch::kCharCnn, "none", 100},
      {"LSTM(Glove)+CharCNN", Arch::kLstmCharCnn, "glove", 100},
      {"BiLSTM(Glove)+CharCNN", Arch::kBiLstmCharCnn, "glove", 100},
      {"BiLSTM(Fasttext)+CharCNN", Arch::kBiLstmCharCnn, "fasttext", 300},
  };
  std::vector<ModelConfig> out;
  for (const Row& r : rows) {
    ModelConfig c;
    c.name = r.name;
    c.arch = r.arch;
    c.embedding.kind = r.kind;
    c.embedding.dim = r.dim;
    out.push_back(std::move(c));
  }
  return out;
}

ModelConfig preset_config(std::string_view key) {
  const auto all = preset_configs();
  std::size_t row = 0;
  auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), row);
  if (ec == std::errc{} && ptr == key.data() + key.size()) {
    if (row >= 1 && row <= all.size()) return all[row - 1];
  }
  for (const auto& c : all)
    if (c.name == key) return c;
  throw std::invalid_argument("unknown preset '" + std::string(key) + "'");
}

namespace charcnn {
std::array<std::size_t, 5> stage_lengths() {
  std::array<std::size_t, 5> s{};
  s[0] = CharEncoding::kLength;
  s[1] = nn::conv_output_length(s[0], kKernel, kStride1);
  s[2] = nn::pool_output_length(s[1], kPool, kPool);
  s[3] = nn::conv_output_length(s[2], kKernel, kStride2);
  s[4] = nn::pool_output_length(s[3], kPool, kPool);
  return s;
}
}  // namespace charcnn

std::size_t word_feature_width(const ModelConfig& c) {
  switch (c.arch) {
    case Arch::kCnn: return c.windows.size() * c.filters;
    case Arch::kLstm:
    case Arch::kLstmCharCnn: return c.hidden;
    case Arch::kBiLstm:
    case Arch::kBiLstmCharCnn: return 2 * c.hidden;
    case Arch::kCharCnn: return 0;
  }
  return 0;
}

std::size_t head_input_width(const ModelConfig& c) {
  return word_feature_width(c) + (uses_chars(c.arch) ? charcnn::kDense : 0);
}

Example make_example(const TokenSeq& tokens, std::string_view char_text, std::int32_t label,
                     const Vocab& vocab, std::size_t max_len) {
  return Example{encode_pad(tokens, vocab, max_len), encode_chars(char_text), label};
}

template <typename T>
std::int32_t argmax_row(const RowVector<T>& row) {
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < row.size(); ++j)
    if (row(j) > row(best)) best = j;
  return static_cast<std::int32_t>(best);
}

// ---------------------------------------------------------------------------

template <typename T>
struct Classifier<T>::Tape {
  struct ConvTrace {
    Matrix<T> pre;
    nn::PoolResult<T> pool;
  };
  struct CharTrace {
    Matrix<T> input;
    Matrix<T> pre1;
    nn::PoolResult<T> pool1;
    Matrix<T> pre2;
    nn::PoolResult<T> pool2;
  };

  std::vector<const Example*> batch;

  // CNN word branch: one n x d sequence per example.
  std::vector<Matrix<T>> seqs;
  std::vector<Matrix<T>> seq_masks;
  std::vector<std::vector<ConvTrace>> conv;

  // Recurrent word branch: one batch x d matrix per time step.
  std::vector<Matrix<T>> steps;
  std::vector<Matrix<T>> step_masks;
  nn::LstmCache<T> uni1, uni2;
  nn::BiLstmCache<T> bi1, bi2;
  std::vector<Matrix<T>> layer2_inputs;

  std::vector<CharTrace> chars;
  Matrix<T> char_flat;
  Matrix<T> char_pre;

  Matrix<T> features;
  Matrix<T> logits;
};

template <typename T>
Classifier<T>::Classifier(ModelConfig config, Vocab vocab, const PretrainedEmbeddings* pretrained)
    : config_(std::move(config)), vocab_(std::move(vocab)) {
  config_.validate();
  Rng rng(derive_seed(config_.seed, streams::kWeights));
  const auto d = static_cast<Eigen::Index>(config_.embedding.dim);
  const auto H = static_cast<Eigen::Index>(config_.hidden);

  if (uses_words(config_.arch)) {
    embedding_.name = "embedding";
    embedding_.value = init_embedding_matrix<T>(vocab_, config_.embedding.dim, pretrained,
                                                config_.seed);
    embedding_.grad = Matrix<T>::Zero(embedding_.value.rows(), embedding_.value.cols());
  }
  if (config_.arch == Arch::kCnn) {
    for (std::size_t w : config_.windows) {
      word_convs_.push_back(nn::make_filter_bank<T>("cnn.conv" + std::to_string(w),
                                                    static_cast<Eigen::Index>(w), d,
                                                    static_cast<Eigen::Index>(config_.filters),
                                                    rng));
    }
  }
  if (is_recurrent(config_.arch)) {
    if (is_bidirectional(config_.arch)) {
      rnn_.push_back(nn::make_lstm<T>("rnn1.fwd", d, H, rng));
      rnn_.push_back(nn::make_lstm<T>("rnn1.bwd", d, H, rng));
      rnn_.push_back(nn::make_lstm<T>("rnn2.fwd", d + 2 * H, H, rng));
      rnn_.push_back(nn::make_lstm<T>("rnn2.bwd", d + 2 * H, H, rng));
    } else {
      rnn_.push_back(nn::make_lstm<T>("rnn1", d, H, rng));
      rnn_.push_back(nn::make_lstm<T>("rnn2", d + H, H, rng));
    }
  }
  if (uses_chars(config_.arch)) {
    const auto F = static_cast<Eigen::Index>(config_.char_filters);
    const auto lengths = charcnn::stage_lengths();
    char_conv1_ = nn::make_filter_bank<T>("char.conv1", charcnn::kKernel,
                                          static_cast<Eigen::Index>(CharAlphabet::kSize), F, rng);
    char_conv2_ = nn::make_filter_bank<T>("char.conv2", charcnn::kKernel, F, F, rng);
    char_dense_ = nn::make_dense<T>("char.dense", static_cast<Eigen::Index>(lengths[4]) * F,
                                    charcnn::kDense, rng);
  }
  head_ = nn::make_dense<T>("head", static_cast<Eigen::Index>(head_input_width(config_)),
                            static_cast<Eigen::Index>(config_.classes), rng);
  adam_.hyper.lr = config_.lr;
}

template <typename T>
std::vector<Param<T>*> Classifier<T>::parameters() {
  std::vector<Param<T>*> out;
  if (uses_words(config_.arch)) out.push_back(&embedding_);
  for (auto& bank : word_convs_) {
    out.push_back(&bank.weight);
    out.push_back(&bank.bias);
  }
  for (auto& layer : rnn_) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  if (uses_chars(config_.arch)) {
    for (auto* p : {&char_conv1_.weight, &char_conv1_.bias, &char_conv2_.weight,
                    &char_conv2_.bias, &char_dense_.weight, &char_dense_.bias}) {
      out.push_back(p);
    }
  }
  out.push_back(&head_.weight);
  out.push_back(&head_.bias);
  return out;
}

template <typename T>
std::vector<const Param<T>*> Classifier<T>::parameters() const {
  auto mutable_params = const_cast<Classifier*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

template <typename T>
std::size_t Classifier<T>::feature_width() const {
  return head_input_width(config_);
}

template <typename T>
void Classifier<T>::zero_grad() {
  for (Param<T>* p : parameters()) p->zero_grad();
}

template <typename T>
typename Classifier<T>::Tape Classifier<T>::forward(std::span<const Example* const> batch,
                                                    nn::Mode mode, Rng* rng) const {
  Tape tape;
  tape.batch.assign(batch.begin(), batch.end());
  const auto B = static_cast<Eigen::Index>(batch.size());
  const auto n = static_cast<Eigen::Index>(config_.max_len);
  const Eigen::Index d = embedding_.value.cols();
  const double rate = mode == nn::Mode::kTraining ? config_.dropout : 0.0;
  Rng fallback(0);
  Rng& dropout_rng = rng ? *rng : fallback;

  for (const Example* ex : batch) {
    if (ex->word_ids.size() != config_.max_len && uses_words(config_.arch)) {
      throw std::invalid_argument("example length does not match max_len");
    }
  }

  std::vector<Matrix<T>> parts;

  if (config_.arch == Arch::kCnn) {
    tape.seqs.resize(batch.size());
    tape.seq_masks.resize(batch.size());
    tape.conv.resize(batch.size());
    Matrix<T> pooled(B, static_cast<Eigen::Index>(word_feature_width(config_)));
    for (Eigen::Index b = 0; b < B; ++b) {
      Matrix<T> seq(n, d);
      for (Eigen::Index t = 0; t < n; ++t)
        seq.row(t) = embedding_.value.row(batch[b]->word_ids[static_cast<std::size_t>(t)]);
      tape.seqs[b] = nn::dropout_apply(seq, rate, mode, dropout_rng, &tape.seq_masks[b]);
      Eigen::Index offset = 0;
      for (const auto& bank : word_convs_) {
        typename Tape::ConvTrace trace;
        trace.pre = nn::conv1d_forward(bank, tape.seqs[b], 1);
        trace.pool = nn::global_maxpool_forward(nn::relu_forward(trace.pre));
        pooled.block(b, offset, 1, bank.filters()) = trace.pool.output;
        offset += bank.filters();
        tape.conv[b].push_back(std::move(trace));
      }
    }
    parts.push_back(std::move(pooled));
  }

  if (is_recurrent(config_.arch)) {
    tape.steps.resize(static_cast<std::size_t>(n));
    tape.step_masks.resize(static_cast<std::size_t>(n));
    for (Eigen::Index t = 0; t < n; ++t) {
      Matrix<T> step(B, d);
      for (Eigen::Index b = 0; b < B; ++b)
        step.row(b) = embedding_.value.row(batch[b]->word_ids[static_cast<std::size_t>(t)]);
      tape.steps[t] = nn::dropout_apply(step, rate, mode, dropout_rng, &tape.step_masks[t]);
    }
    const bool bi = is_bidirectional(config_.arch);
    const Eigen::Index layer1_width = bi ? 2 * config_.hidden : config_.hidden;
    const std::vector<Matrix<T>>& layer1_out =
        bi ? (tape.bi1 = nn::bilstm_forward(rnn_[0], rnn_[1], tape.steps)).outputs
           : (tape.uni1 = nn::lstm_forward(rnn_[0], tape.steps)).hidden;
    tape.layer2_inputs.resize(static_cast<std::size_t>(n));
    for (Eigen::Index t = 0; t < n; ++t) {
      Matrix<T>& x2 = tape.layer2_inputs[t];
      x2.resize(B, d + layer1_width);
      x2.leftCols(d) = tape.steps[t];
      x2.rightCols(layer1_width) = layer1_out[t];
    }
    if (bi) {
      tape.bi2 = nn::bilstm_forward(rnn_[2], rnn_[3], tape.layer2_inputs);
      const Eigen::Index H = config_.hidden;
      Matrix<T> readout(B, 2 * H);
      readout.leftCols(H) = tape.bi2.forward.hidden.back();
      readout.rightCols(H) = tape.bi2.backward.hidden.back();
      parts.push_back(std::move(readout));
    } else {
      tape.uni2 = nn::lstm_forward(rnn_[1], tape.layer2_inputs);
      parts.push_back(tape.uni2.hidden.back());
    }
  }

  if (uses_chars(config_.arch)) {
    const auto F = static_cast<Eigen::Index>(config_.char_filters);
    const auto lengths = charcnn::stage_lengths();
    const auto flat_width = static_cast<Eigen::Index>(lengths[4]) * F;
    tape.chars.resize(batch.size());
    tape.char_flat.resize(B, flat_width);
    for (Eigen::Index b = 0; b < B; ++b) {
      auto& tr = tape.chars[b];
      tr.input = batch[b]->chars.template to_matrix<T>();
      tr.pre1 = nn::conv1d_forward(char_conv1_, tr.input, charcnn::kStride1);
      tr.pool1 = nn::maxpool1d_forward(nn::relu_forward(tr.pre1), charcnn::kPool, charcnn::kPool);
      tr.pre2 = nn::conv1d_forward(char_conv2_, tr.pool1.output, charcnn::kStride2);
      tr.pool2 = nn::maxpool1d_forward(nn::relu_forward(tr.pre2), charcnn::kPool, charcnn::kPool);
      tape.char_flat.row(b) = Eigen::Map<const RowVector<T>>(tr.pool2.output.data(), flat_width);
    }
    tape.char_pre = nn::dense_forward(char_dense_, tape.char_flat);
    parts.push_back(nn::relu_forward(tape.char_pre));
  }

  Eigen::Index width = 0;
  for (const auto& p : parts) width += p.cols();
  tape.features.resize(B, width);
  Eigen::Index offset = 0;
  for (const auto& p : parts) {
    tape.features.middleCols(offset, p.cols()) = p;
    offset += p.cols();
  }
  tape.logits = nn::dense_forward(head_, tape.features);
  return tape;
}

template <typename T>
void Classifier<T>::backward(const Tape& tape, const Matrix<T>& grad_logits) {
  const auto B = static_cast<Eigen::Index>(tape.batch.size());
  const auto n = static_cast<Eigen::Index>(config_.max_len);
  const Eigen::Index d = embedding_.value.cols();
  const Matrix<T> grad_features = nn::dense_backward(head_, tape.features, grad_logits);
  const auto word_width = static_cast<Eigen::Index>(word_feature_width(config_));

  auto scatter_embedding = [&](std::int32_t id, const auto& grad_row) {
    if (id != kPadIndex) embedding_.grad.row(id) += grad_row;
  };

  if (config_.arch == Arch::kCnn) {
    for (Eigen::Index b = 0; b < B; ++b) {
      Matrix<T> grad_seq = Matrix<T>::Zero(n, d);
      Eigen::Index offset = 0;
      for (std::size_t w = 0; w < word_convs_.size(); ++w) {
        auto& bank = word_convs_[w];
        const auto& trace = tape.conv[b][w];
        const Matrix<T> g_pool = grad_features.block(b, offset, 1, bank.filters());
        offset += bank.filters();
        const Matrix<T> g_act = nn::maxpool1d_backward(trace.pool, g_pool);
        grad_seq += nn::conv1d_backward(bank, tape.seqs[b], 1, nn::relu_backward(trace.pre, g_act));
      }
      if (tape.seq_masks[b].size() != 0) grad_seq = grad_seq.cwiseProduct(tape.seq_masks[b]);
      for (Eigen::Index t = 0; t < n; ++t)
        scatter_embedding(tape.batch[b]->word_ids[static_cast<std::size_t>(t)], grad_seq.row(t));
    }
  }

  if (is_recurrent(config_.arch)) {
    const bool bi = is_bidirectional(config_.arch);
    const Eigen::Index H = config_.hidden;
    const Eigen::Index layer1_width = bi ? 2 * H : H;
    const auto steps = static_cast<std::size_t>(n);
    const Matrix<T> g_readout = grad_features.leftCols(word_width);

    std::vector<Matrix<T>> g2(steps);
    std::vector<Matrix<T>> dx2;
    if (bi) {
      g2.back() = Matrix<T>::Zero(B, 2 * H);
      g2.back().leftCols(H) = g_readout.leftCols(H);
      if (g2.front().size() == 0) g2.front() = Matrix<T>::Zero(B, 2 * H);
      g2.front().rightCols(H) += g_readout.rightCols(H);
      dx2 = nn::bilstm_backward(rnn_[2], rnn_[3], tape.bi2, g2);
    } else {
      g2.back() = g_readout;
      dx2 = nn::lstm_backward(rnn_[1], tape.uni2, g2);
    }

    std::vector<Matrix<T>> g1(steps);
    std::vector<Matrix<T>> d_steps(steps);
    for (std::size_t t = 0; t < steps; ++t) {
      d_steps[t] = dx2[t].leftCols(d);
      g1[t] = dx2[t].rightCols(layer1_width);
    }
    const std::vector<Matrix<T>> dx1 = bi ? nn::bilstm_backward(rnn_[0], rnn_[1], tape.bi1, g1)
                                          : nn::lstm_backward(rnn_[0], tape.uni1, g1);
    for (std::size_t t = 0; t < steps; ++t) {
      d_steps[t] += dx1[t];
      if (tape.step_masks[t].size() != 0) d_steps[t] = d_steps[t].cwiseProduct(tape.step_masks[t]);
      for (Eigen::Index b = 0; b < B; ++b)
        scatter_embedding(tape.batch[b]->word_ids[t], d_steps[t].row(b));
    }
  }

  if (uses_chars(config_.arch)) {
    const auto F = static_cast<Eigen::Index>(config_.char_filters);
    const auto lengths = charcnn::stage_lengths();
    const Matrix<T> g_char = grad_features.rightCols(charcnn::kDense);
    const Matrix<T> g_flat =
        nn::dense_backward(char_dense_, tape.char_flat, nn::relu_backward(tape.char_pre, g_char));
    for (Eigen::Index b = 0; b < B; ++b) {
      const auto& tr = tape.chars[b];
      const Matrix<T> g_pool2 =
          Eigen::Map<const Matrix<T>>(g_flat.row(b).data(), static_cast<Eigen::Index>(lengths[4]), F);
      const Matrix<T> g_act2 = nn::maxpool1d_backward(tr.pool2, g_pool2);
      const Matrix<T> g_pool1 = nn::conv1d_backward(char_conv2_, tr.pool1.output, charcnn::kStride2,
                                                    nn::relu_backward(tr.pre2, g_act2));
      const Matrix<T> g_act1 = nn::maxpool1d_backward(tr.pool1, g_pool1);
      nn::conv1d_backward(char_conv1_, tr.input, charcnn::kStride1, nn::relu_backward(tr.pre1, g_act1));
    }
  }
}

template <typename T>
Matrix<T> Classifier<T>::logits(std::span<const Example* const> batch) const {
  return forward(batch, nn::Mode::kInference, nullptr).logits;
}

template <typename T>
double Classifier<T>::accumulate_gradients(std::span<const Example* const> batch, nn::Mode mode,
                                           Rng& rng) {
  const Tape tape = forward(batch, mode, &rng);
  std::vector<std::int32_t> golds;
  golds.reserve(batch.size());
  for (const Example* ex : batch) golds.push_back(ex->label);
  const auto xent = nn::softmax_xent_batch<T>(tape.logits, golds);
  backward(tape, xent.grad);
  return xent.mean_loss;
}

template <typename T>
std::vector<std::int32_t> Classifier<T>::predict(std::span<const Example> examples) const {
  constexpr std::size_t kChunk = 64;
  std::vector<std::int32_t> out;
  out.reserve(examples.size());
  std::vector<const Example*> chunk;
  for (std::size_t start = 0; start < examples.size(); start += kChunk) {
    chunk.clear();
    for (std::size_t i = start; i < std::min(examples.size(), start + kChunk); ++i)
      chunk.push_back(&examples[i]);
    const Matrix<T> z = logits(chunk);
    for (Eigen::Index r = 0; r < z.rows(); ++r) out.push_back(argmax_row<T>(z.row(r)));
  }
  return out;
}

template <typename T>
TrainHistory train_model(Classifier<T>& model, std::span<const Example> train) {
  const ModelConfig& config = model.config();
  if (train.empty()) throw std::invalid_argument("training set is empty");
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (train[i].label < 0 || static_cast<std::size_t>(train[i].label) >= config.classes) {
      throw std::invalid_argument("label " + std::to_string(train[i].label) + " of example " +
                                  std::to_string(i) + " is outside [0, " +
                                  std::to_string(config.classes) + ")");
    }
  }
  std::vector<std::size_t> indices(train.size());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;

  Rng dropout_rng(derive_seed(config.seed, streams::kDropout));
  const std::uint64_t shuffle_seed = derive_seed(config.seed, streams::kShuffle);
  auto params = model.parameters();
  TrainHistory history;
  std::vector<const Example*> batch;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double total = 0.0;
    for (const auto& batch_indices : make_batches(indices, config.batch, shuffle_seed, epoch)) {
      batch.clear();
      for (std::size_t i : batch_indices) batch.push_back(&train[i]);
      model.zero_grad();
      const double loss = model.accumulate_gradients(batch, nn::Mode::kTraining, dropout_rng);
      nn::adam_step<T>(params, model.optimizer());
      total += loss * static_cast<double>(batch.size());
    }
    history.epoch_loss.push_back(total / static_cast<double>(train.size()));
  }
  return history;
}

template class Classifier<float>;
template class Classifier<double>;
template TrainHistory train_model<float>(Classifier<float>&, std::span<const Example>);
template TrainHistory train_model<double>(Classifier<double>&, std::span<const Example>);
template std::int32_t argmax_row<float>(const RowVector<float>&);
template std::int32_t argmax_row<double>(const RowVector<double>&);

}  // namespace hatelab
