#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace hatelab {

using TokenSeq = std::vector<std::string>;

/// Surface form -> replacement. Loaded from `key<TAB>value` fixture files.
class ReplacementTable {
 public:
  ReplacementTable() = default;
  explicit ReplacementTable(std::map<std::string, std::string> entries);

  /// Reads a `key<TAB>value` file; '#'-prefixed lines and blank lines are
  /// skipped. Throws std::runtime_error on duplicate keys, empty values or
  /// lines without a tab.
  static ReplacementTable load(const std::filesystem::path& path);

  const std::string* find(std::string_view key) const;
  const std::map<std::string, std::string, std::less<>>& entries() const { return entries_; }
  std::size_t max_key_length() const { return max_key_length_; }
  bool empty() const { return entries_.empty(); }

 private:
  std::map<std::string, std::string, std::less<>> entries_;
  std::size_t max_key_length_ = 0;
};

using ContractionTable = ReplacementTable;
using EmoticonTable = ReplacementTable;
using MisspellTable = ReplacementTable;

/// Unigram counts backing hashtag segmentation.
class SegLexicon {
 public:
  SegLexicon() = default;
  explicit SegLexicon(std::map<std::string, std::uint64_t> counts);

  /// Reads `word<TAB>count` lines. Counts must be positive integers.
  static SegLexicon load(const std::filesystem::path& path);

  /// Natural log of the unigram probability. Unknown words get the
  /// length-penalised mass 10 / (total * 10^len).
  double log_prob(std::string_view word) const;

  std::uint64_t total() const { return total_; }
  std::size_t size() const { return counts_.size(); }
  std::size_t max_word_length() const { return max_word_length_; }

 private:
  std::map<std::string, std::uint64_t, std::less<>> counts_;
  std::uint64_t total_ = 0;
  std::size_t max_word_length_ = 0;
};

struct PipelineResources {
  ContractionTable contractions;
  EmoticonTable emoticons;
  MisspellTable misspellings;
  SegLexicon lexicon;

  /// Loads contractions.tsv, emoticons.tsv, misspellings.tsv and
  /// seg_lexicon.tsv from `dir`.
  static PipelineResources load(const std::filesystem::path& dir);
};

/// Fixture directory: explicit argument, else $HATELAB_FIXTURES, else the
/// directory bundled with the source tree.
std::filesystem::path resolve_fixture_dir(const std::filesystem::path& explicit_dir = {});

struct PipelineStats {
  std::size_t emoticons_mapped = 0;
  std::size_t contractions_expanded = 0;
  std::size_t hashtags_segmented = 0;
  std::size_t misspellings_expanded = 0;

  PipelineStats& operator+=(const PipelineStats& other);
};

std::string map_emoticons(std::string_view text, const EmoticonTable& table,
                          PipelineStats* stats = nullptr);

std::string expand_contractions(std::string_view text, const ContractionTable& table,
                                PipelineStats* stats = nullptr);

/// Maximum-likelihood split of the lowercased tag body (without '#').
/// Concatenating the result reproduces the lowercased body.
std::vector<std::string> segment_hashtag(std::string_view tag, const SegLexicon& lex);

std::string normalize(std::string_view text);

TokenSeq preprocess(std::string_view text, const PipelineResources& resources,
                    PipelineStats* stats = nullptr);

std::string join_tokens(const TokenSeq& tokens, std::string_view sep = " ");

}  // namespace hatelab
