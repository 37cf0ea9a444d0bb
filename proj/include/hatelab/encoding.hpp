#pragma once

#include "hatelab/random.hpp"
#include "hatelab/tensor.hpp"
#include "hatelab/text_pipeline.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace hatelab {

inline constexpr std::int32_t kPadIndex = 0;
inline constexpr std::int32_t kUnknownIndex = 1;
inline constexpr std::size_t kDefaultMaxLen = 50;

/// Token -> index mapping. Index 0 is padding, index 1 the unknown token;
/// corpus tokens occupy 2..V-1.
class Vocab {
 public:
  Vocab();
  /// `tokens` in index order starting at index 2.
  explicit Vocab(const std::vector<std::string>& tokens);

  std::int32_t index_of(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(std::int32_t index) const { return tokens_.at(index); }
  std::size_t size() const { return tokens_.size(); }
  /// Corpus tokens (indices 2..V-1) in index order.
  std::vector<std::string> corpus_tokens() const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
};

Vocab build_vocab(const std::vector<TokenSeq>& corpus, std::size_t min_freq = 1);

/// Left-pads with kPadIndex; keeps the last `max_len` tokens when longer.
std::vector<std::int32_t> encode_pad(const TokenSeq& tokens, const Vocab& vocab,
                                     std::size_t max_len = kDefaultMaxLen);

class EmbeddingFormatError : public std::runtime_error {
 public:
  EmbeddingFormatError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct PretrainedEmbeddings {
  std::unordered_map<std::string, std::vector<double>> vectors;
  std::optional<std::size_t> dim;

  const std::vector<double>* find(const std::string& token) const;
  /// Throws when no dimension was established (empty file).
  std::size_t dimension() const;
};

/// Text format: `token v1 ... vd` per line. The first line fixes d;
/// duplicate tokens keep their first vector.
PretrainedEmbeddings load_embedding_file(const std::filesystem::path& path);

inline constexpr double kOovInitRange = 0.25;

/// Row 0 is zero; rows with a pretrained vector copy it; every other row
/// (always including row 1) is uniform in [-0.25, 0.25] from `seed`.
template <typename T>
Matrix<T> init_embedding_matrix(const Vocab& vocab, std::size_t dim,
                                const PretrainedEmbeddings* pretrained, std::uint64_t seed);

struct CharAlphabet {
  static constexpr std::size_t kSize = 27;
  static constexpr std::uint8_t kCatchAll = 26;

  /// Column for a code point: a-z / A-Z map to 0..25, everything else to 26.
  static std::uint8_t column(char32_t code_point);
};

/// 256 x 27 one-hot character matrix, stored as the hot column per row.
struct CharEncoding {
  static constexpr std::size_t kLength = 256;
  std::array<std::uint8_t, kLength> columns{};

  template <typename T>
  Matrix<T> to_matrix() const {
    Matrix<T> m = Matrix<T>::Zero(kLength, CharAlphabet::kSize);
    for (std::size_t r = 0; r < kLength; ++r) m(r, columns[r]) = T(1);
    return m;
  }

  bool operator==(const CharEncoding&) const = default;
};

/// Encodes the first 256 code points of `text`; shorter texts are
/// right-padded with catch-all rows.
CharEncoding encode_chars(std::string_view text, const CharAlphabet& alphabet = {});

}  // namespace hatelab
