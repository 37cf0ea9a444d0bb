#pragma once

#include "hatelab/adam.hpp"
#include "hatelab/encoding.hpp"
#include "hatelab/layers.hpp"

#include "json.hpp"

#include <array>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hatelab {

enum class Arch { kCnn, kLstm, kBiLstm, kCharCnn, kLstmCharCnn, kBiLstmCharCnn };

std::string arch_name(Arch arch);
/// Accepts cnn, lstm, bilstm, charcnn, lstm+charcnn, bilstm+charcnn.
Arch parse_arch(std::string_view name);

bool uses_words(Arch arch);
bool uses_chars(Arch arch);
bool is_recurrent(Arch arch);
bool is_bidirectional(Arch arch);

struct EmbeddingSource {
  /// Display tag such as "glove" or "random".
  std::string kind = "random";
  /// Pretrained vectors in text format; empty for random initialisation.
  std::filesystem::path path;
  std::size_t dim = 100;
};

struct ModelConfig {
  std::string name;
  Arch arch = Arch::kCnn;
  EmbeddingSource embedding;
  std::size_t max_len = kDefaultMaxLen;
  std::size_t hidden = 100;
  std::vector<std::size_t> windows{3, 4, 5};
  std::size_t filters = 100;
  std::size_t char_filters = 64;
  double dropout = 0.2;
  std::size_t batch = 32;
  std::size_t epochs = 5;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  std::size_t classes = 2;
  std::size_t min_freq = 1;

  /// Throws std::invalid_argument listing every violated constraint.
  void validate() const;
};

nlohmann::json config_to_json(const ModelConfig& config);
/// Missing keys keep their defaults; wrong types throw.
ModelConfig config_from_json(const nlohmann::json& j);

/// The thirteen word/char configurations of the results table, in table
/// order. Embedding paths are left empty (random init at the source's
/// native dimension) and `classes` must be set by the caller.
std::vector<ModelConfig> preset_configs();
/// Lookup by 1-based row number ("12") or by name ("BiLSTM(Glove)+CharCNN").
ModelConfig preset_config(std::string_view key);

/// Character branch geometry.
namespace charcnn {
inline constexpr Eigen::Index kKernel = 4;
inline constexpr Eigen::Index kStride1 = 4;
inline constexpr Eigen::Index kStride2 = 2;
inline constexpr Eigen::Index kPool = 3;
inline constexpr Eigen::Index kDense = 64;
/// Sequence lengths after conv1, pool1, conv2, pool2 (256 -> 64 -> 21 -> 9 -> 3).
std::array<std::size_t, 5> stage_lengths();
}  // namespace charcnn

/// Width of the recurrent stack's readout (H or 2H), the CNN's pooled
/// features (windows x filters) or 0 for char-only models.
std::size_t word_feature_width(const ModelConfig& config);
/// Input width of the final dense(k) layer.
std::size_t head_input_width(const ModelConfig& config);

struct Example {
  std::vector<std::int32_t> word_ids;
  CharEncoding chars;
  std::int32_t label = 0;
};

Example make_example(const TokenSeq& tokens, std::string_view char_text, std::int32_t label,
                     const Vocab& vocab, std::size_t max_len);

template <typename T>
class Classifier {
 public:
  /// Builds every layer required by `config.arch` and initialises weights
  /// deterministically from `config.seed`.
  Classifier(ModelConfig config, Vocab vocab, const PretrainedEmbeddings* pretrained = nullptr);

  const ModelConfig& config() const { return config_; }
  const Vocab& vocab() const { return vocab_; }

  /// Trainable parameters in a fixed order.
  std::vector<Param<T>*> parameters();
  std::vector<const Param<T>*> parameters() const;
  Param<T>& embedding() { return embedding_; }

  std::size_t feature_width() const;

  /// Inference-mode logits, batch x classes.
  Matrix<T> logits(std::span<const Example* const> batch) const;

  /// Forward + backward on one batch; gradients accumulate into the
  /// parameters (call zero_grad first). Returns the mean cross-entropy.
  double accumulate_gradients(std::span<const Example* const> batch, nn::Mode mode, Rng& rng);
  void zero_grad();

  nn::AdamState<T>& optimizer() { return adam_; }
  const nn::AdamState<T>& optimizer() const { return adam_; }

  /// Argmax class per example, ties toward the lowest index, dropout off.
  std::vector<std::int32_t> predict(std::span<const Example> examples) const;

 private:
  struct Tape;
  Tape forward(std::span<const Example* const> batch, nn::Mode mode, Rng* rng) const;
  void backward(const Tape& tape, const Matrix<T>& grad_logits);

  ModelConfig config_;
  Vocab vocab_;
  Param<T> embedding_;
  std::vector<nn::FilterBank<T>> word_convs_;
  std::vector<nn::LstmLayer<T>> rnn_;  // layer1 fwd, [layer1 bwd], layer2 fwd, [layer2 bwd]
  nn::FilterBank<T> char_conv1_;
  nn::FilterBank<T> char_conv2_;
  nn::DenseLayer<T> char_dense_;
  nn::DenseLayer<T> head_;
  nn::AdamState<T> adam_;
};

struct TrainHistory {
  std::vector<double> epoch_loss;
};

/// Mini-batch Adam on categorical cross-entropy with a seeded shuffle per
/// epoch. Labels are validated before any update.
template <typename T>
TrainHistory train_model(Classifier<T>& model, std::span<const Example> train);

/// Index of the largest entry; ties resolve to the lowest index.
template <typename T>
std::int32_t argmax_row(const RowVector<T>& row);

}  // namespace hatelab
