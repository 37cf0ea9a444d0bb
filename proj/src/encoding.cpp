#include "hatelab/encoding.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>

namespace hatelab {

Vocab::Vocab() : tokens_{"<pad>", "<unk>"} {}

Vocab::Vocab(const std::vector<std::string>& tokens) : Vocab() {
  for (const auto& token : tokens) {
    if (token.empty()) throw std::invalid_argument("vocab: empty token");
    const auto index = static_cast<std::int32_t>(tokens_.size());
    if (!index_.emplace(token, index).second) {
      throw std::invalid_argument("vocab: duplicate token '" + token + "'");
    }
    tokens_.push_back(token);
  }
}

std::int32_t Vocab::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnknownIndex : it->second;
}

bool Vocab::contains(std::string_view token) const {
  return index_.contains(std::string(token));
}

std::vector<std::string> Vocab::corpus_tokens() const {
  return {tokens_.begin() + 2, tokens_.end()};
}

Vocab build_vocab(const std::vector<TokenSeq>& corpus, std::size_t min_freq) {
  if (corpus.empty()) throw std::invalid_argument("empty corpus");
  if (min_freq == 0) throw std::invalid_argument("min_freq must be positive");
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : corpus)
    for (const auto& token : doc) ++counts[token];

  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [token, count] : counts)
    if (count >= min_freq) ranked.emplace_back(token, count);
  // std::map iteration is already lexicographic; stable sort keeps that
  // order among equal counts.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  std::vector<std::string> tokens;
  tokens.reserve(ranked.size());
  for (auto& entry : ranked) tokens.push_back(std::move(entry.first));
  return Vocab(tokens);
}

std::vector<std::int32_t> encode_pad(const TokenSeq& tokens, const Vocab& vocab,
                                     std::size_t max_len) {
  if (max_len == 0) throw std::invalid_argument("max_len must be positive");
  std::vector<std::int32_t> out(max_len, kPadIndex);
  const std::size_t keep = std::min(tokens.size(), max_len);
  const std::size_t src = tokens.size() - keep;
  const std::size_t dst = max_len - keep;
  for (std::size_t i = 0; i < keep; ++i) out[dst + i] = vocab.index_of(tokens[src + i]);
  return out;
}

const std::vector<double>* PretrainedEmbeddings::find(const std::string& token) const {
  auto it = vectors.find(token);
  return it == vectors.end() ? nullptr : &it->second;
}

std::size_t PretrainedEmbeddings::dimension() const {
  if (!dim) throw std::runtime_error("embedding dimension undefined (empty embedding file)");
  return *dim;
}

PretrainedEmbeddings load_embedding_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read embedding file: " + path.string());

  PretrainedEmbeddings out;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const char* p = line.data();
    const char* end = p + line.size();
    auto skip_space = [&] {
      while (p < end && (*p == ' ' || *p == '\t')) ++p;
    };
    skip_space();
    if (p == end) continue;
    const char* token_begin = p;
    while (p < end && *p != ' ' && *p != '\t') ++p;
    std::string token(token_begin, p);

    values.clear();
    for (skip_space(); p < end; skip_space()) {
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc{} || (next < end && *next != ' ' && *next != '\t')) {
        throw EmbeddingFormatError(line_no, "malformed number for token '" + token + "'");
      }
      values.push_back(v);
      p = next;
    }
    if (values.empty()) throw EmbeddingFormatError(line_no, "no vector for token '" + token + "'");
    if (!out.dim) {
      out.dim = values.size();
    } else if (values.size() != *out.dim) {
      throw EmbeddingFormatError(line_no, "expected " + std::to_string(*out.dim) +
                                              " components, found " +
                                              std::to_string(values.size()));
    }
    out.vectors.try_emplace(std::move(token), values);
  }
  if (in.bad()) throw std::runtime_error("I/O error reading " + path.string());
  return out;
}

template <typename T>
Matrix<T> init_embedding_matrix(const Vocab& vocab, std::size_t dim,
                                const PretrainedEmbeddings* pretrained, std::uint64_t seed) {
  if (dim == 0) throw std::invalid_argument("embedding dimension must be positive");
  if (pretrained && pretrained->dim && *pretrained->dim != dim) {
    throw std::invalid_argument("pretrained dimension " + std::to_string(*pretrained->dim) +
                                " does not match requested " + std::to_string(dim));
  }
  const auto rows = static_cast<Eigen::Index>(vocab.size());
  const auto cols = static_cast<Eigen::Index>(dim);
  Matrix<T> m = Matrix<T>::Zero(rows, cols);
  Rng rng(derive_seed(seed, streams::kEmbedding));
  std::uniform_real_distribution<double> uniform(-kOovInitRange, kOovInitRange);
  for (Eigen::Index r = 1; r < rows; ++r) {
    const std::vector<double>* vec =
        (pretrained && r >= 2) ? pretrained->find(vocab.token(static_cast<std::int32_t>(r)))
                               : nullptr;
    // One draw per component for every row, pretrained or not.
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double draw = uniform(rng);
      m(r, c) = static_cast<T>(vec ? (*vec)[c] : draw);
    }
  }
  return m;
}

template Matrix<float> init_embedding_matrix<float>(const Vocab&, std::size_t,
                                                    const PretrainedEmbeddings*, std::uint64_t);
template Matrix<double> init_embedding_matrix<double>(const Vocab&, std::size_t,
                                                      const PretrainedEmbeddings*,
                                                      std::uint64_t);

std::uint8_t CharAlphabet::column(char32_t cp) {
  if (cp >= U'a' && cp <= U'z') return static_cast<std::uint8_t>(cp - U'a');
  if (cp >= U'A' && cp <= U'Z') return static_cast<std::uint8_t>(cp - U'A');
  return kCatchAll;
}

CharEncoding encode_chars(std::string_view text, const CharAlphabet& alphabet) {
  CharEncoding enc;
  enc.columns.fill(CharAlphabet::kCatchAll);
  std::size_t row = 0;
  std::size_t i = 0;
  while (i < text.size() && row < CharEncoding::kLength) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t width = 1;
    if (lead >= 0xF0) width = 4;
    else if (lead >= 0xE0) width = 3;
    else if (lead >= 0xC0) width = 2;
    // Non-ASCII code points all map to the catch-all column.
    const char32_t cp = width == 1 ? static_cast<char32_t>(lead) : 0x80;
    enc.columns[row++] = alphabet.column(cp);
    i += std::min(width, text.size() - i);
  }
  return enc;
}

}  // namespace hatelab
