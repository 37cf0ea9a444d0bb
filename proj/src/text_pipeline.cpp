#include "hatelab/text_pipeline.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

namespace hatelab {
namespace {

bool is_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

char to_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = to_lower(c);
  return out;
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

// Reads `key<TAB>value` lines, skipping comments and blank lines.
std::vector<std::pair<std::string, std::string>> read_tab_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fixture file: " + path.string());
  std::vector<std::pair<std::string, std::string>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected key<TAB>value");
    }
    rows.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return rows;
}

// Appends `word` to `out` so that it is separated from surrounding text by
// exactly one space on each side.
void append_isolated(std::string& out, std::string_view word) {
  while (!out.empty() && out.back() == ' ') out.pop_back();
  if (!out.empty()) out.push_back(' ');
  out.append(word);
}

bool is_apostrophe_word_char(char c) { return is_alnum(c) || c == '\''; }

// Typographic apostrophes (U+2018, U+2019) are folded to ASCII.
std::string fold_apostrophes(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (i + 2 < text.size() && static_cast<unsigned char>(text[i]) == 0xE2 &&
        static_cast<unsigned char>(text[i + 1]) == 0x80 &&
        (static_cast<unsigned char>(text[i + 2]) == 0x98 ||
         static_cast<unsigned char>(text[i + 2]) == 0x99)) {
      out.push_back('\'');
      i += 2;
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

bool is_plain_words(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == ' ')) return false;
  return true;
}

}  // namespace

ReplacementTable::ReplacementTable(std::map<std::string, std::string> entries) {
  for (auto& [key, value] : entries) {
    if (key.empty()) throw std::runtime_error("replacement table: empty key");
    if (value.empty()) throw std::runtime_error("replacement table: empty value for '" + key + "'");
    max_key_length_ = std::max(max_key_length_, key.size());
    entries_.emplace(key, value);
  }
}

ReplacementTable ReplacementTable::load(const std::filesystem::path& path) {
  std::map<std::string, std::string> entries;
  for (auto& [key, value] : read_tab_file(path)) {
    if (!entries.emplace(key, value).second) {
      throw std::runtime_error(path.string() + ": duplicate key '" + key + "'");
    }
  }
  return ReplacementTable(std::move(entries));
}

const std::string* ReplacementTable::find(std::string_view key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

SegLexicon::SegLexicon(std::map<std::string, std::uint64_t> counts) {
  for (auto& [word, count] : counts) {
    if (word.empty()) throw std::runtime_error("lexicon: empty word");
    if (count == 0) throw std::runtime_error("lexicon: zero count for '" + word + "'");
    total_ += count;
    max_word_length_ = std::max(max_word_length_, word.size());
    counts_.emplace(word, count);
  }
}

SegLexicon SegLexicon::load(const std::filesystem::path& path) {
  std::map<std::string, std::uint64_t> counts;
  for (auto& [word, value] : read_tab_file(path)) {
    std::uint64_t count = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), count);
    if (ec != std::errc{} || ptr != value.data() + value.size() || count == 0) {
      throw std::runtime_error(path.string() + ": bad count for '" + word + "'");
    }
    if (!counts.emplace(lowercase(word), count).second) {
      throw std::runtime_error(path.string() + ": duplicate word '" + word + "'");
    }
  }
  return SegLexicon(std::move(counts));
}

double SegLexicon::log_prob(std::string_view word) const {
  const double log_total = std::log(static_cast<double>(total_));
  if (word.size() <= max_word_length_) {
    auto it = counts_.find(word);
    if (it != counts_.end()) return std::log(static_cast<double>(it->second)) - log_total;
  }
  // 10 / (total * 10^len)
  return std::log(10.0) - log_total - static_cast<double>(word.size()) * std::log(10.0);
}

PipelineResources PipelineResources::load(const std::filesystem::path& dir) {
  PipelineResources res;
  res.contractions = ReplacementTable::load(dir / "contractions.tsv");
  res.emoticons = ReplacementTable::load(dir / "emoticons.tsv");
  res.misspellings = ReplacementTable::load(dir / "misspellings.tsv");
  res.lexicon = SegLexicon::load(dir / "seg_lexicon.tsv");
  if (res.lexicon.size() == 0) throw std::runtime_error("segmentation lexicon is empty");

  static const std::set<std::string, std::less<>> kEmotionTokens = {"happy", "sad", "disgust",
                                                                     "anger"};
  for (const auto& [key, value] : res.emoticons.entries()) {
    if (!kEmotionTokens.contains(value)) {
      throw std::runtime_error("emoticon '" + key + "' maps to unsupported token '" + value + "'");
    }
    bool has_symbol = false;
    for (char c : key) has_symbol |= !is_alnum(c) && !is_space(c);
    if (!has_symbol) throw std::runtime_error("emoticon '" + key + "' has no symbol character");
  }
  for (const auto& [key, value] : res.misspellings.entries()) {
    if (!is_plain_words(key) || key.find(' ') != std::string::npos) {
      throw std::runtime_error("misspelling key '" + key + "' is not a normalized token");
    }
    if (!is_plain_words(value)) {
      throw std::runtime_error("misspelling replacement '" + value + "' is not normalized text");
    }
    for (const auto& word : split_whitespace(value)) {
      if (res.misspellings.find(word)) {
        throw std::runtime_error("misspelling replacement '" + value + "' contains key '" + word +
                                 "'");
      }
    }
  }
  return res;
}

std::filesystem::path resolve_fixture_dir(const std::filesystem::path& explicit_dir) {
  if (!explicit_dir.empty()) return explicit_dir;
  if (const char* env = std::getenv("HATELAB_FIXTURES"); env && *env) return env;
  return HATELAB_FIXTURE_DIR;
}

PipelineStats& PipelineStats::operator+=(const PipelineStats& other) {
  emoticons_mapped += other.emoticons_mapped;
  contractions_expanded += other.contractions_expanded;
  hashtags_segmented += other.hashtags_segmented;
  misspellings_expanded += other.misspellings_expanded;
  return *this;
}

std::string map_emoticons(std::string_view text, const EmoticonTable& table,
                          PipelineStats* stats) {
  std::string out;
  out.reserve(text.size() + 8);
  bool pending_space = false;
  std::size_t i = 0;
  while (i < text.size()) {
    const std::string* replacement = nullptr;
    std::size_t matched = 0;
    const std::size_t longest = std::min(table.max_key_length(), text.size() - i);
    for (std::size_t len = longest; len > 0; --len) {
      const std::string_view candidate = text.substr(i, len);
      const std::string* hit = table.find(candidate);
      if (!hit) continue;
      // Alphanumeric edges of an emoticon must not run into a word.
      if (is_alnum(candidate.front()) && i > 0 && is_alnum(text[i - 1])) continue;
      if (is_alnum(candidate.back()) && i + len < text.size() && is_alnum(text[i + len])) continue;
      replacement = hit;
      matched = len;
      break;
    }
    if (replacement) {
      append_isolated(out, *replacement);
      pending_space = true;
      if (stats) ++stats->emoticons_mapped;
      i += matched;
      while (i < text.size() && text[i] == ' ') ++i;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(text[i]);
    ++i;
  }
  return out;
}

std::string expand_contractions(std::string_view raw, const ContractionTable& table,
                                PipelineStats* stats) {
  const std::string text = fold_apostrophes(raw);
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_apostrophe_word_char(text[i])) {
      out.push_back(text[i]);
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_apostrophe_word_char(text[j])) ++j;
    std::string_view run(text.data() + i, j - i);
    i = j;
    if (run.find('\'') == std::string_view::npos) {
      out.append(run);
      continue;
    }
    // Quote marks hugging a word are not part of it.
    std::size_t lead = 0;
    while (lead < run.size() && run[lead] == '\'') ++lead;
    std::size_t trail = run.size();
    while (trail > lead && run[trail - 1] == '\'') --trail;
    const std::string core = lowercase(run.substr(lead, trail - lead));
    if (const std::string* expansion = table.find(core)) {
      out.append(*expansion);
      if (stats) ++stats->contractions_expanded;
    } else {
      for (char c : core)
        if (c != '\'') out.push_back(c);
    }
  }
  return out;
}

std::vector<std::string> segment_hashtag(std::string_view tag, const SegLexicon& lex) {
  if (!tag.empty() && tag.front() == '#') tag.remove_prefix(1);
  const std::string body = lowercase(tag);
  const std::size_t n = body.size();
  if (n == 0) return {};

  constexpr double kTieTolerance = 1e-12;
  std::vector<double> score(n + 1, -std::numeric_limits<double>::infinity());
  std::vector<std::size_t> words(n + 1, 0);
  std::vector<std::size_t> split(n + 1, 0);
  score[0] = 0.0;
  const std::string_view view(body);
  for (std::size_t end = 1; end <= n; ++end) {
    for (std::size_t start = 0; start < end; ++start) {
      const double candidate = score[start] + lex.log_prob(view.substr(start, end - start));
      const std::size_t count = words[start] + 1;
      const bool better = candidate > score[end] + kTieTolerance;
      const bool tie_fewer =
          std::abs(candidate - score[end]) <= kTieTolerance && count < words[end];
      if (better || tie_fewer) {
        score[end] = candidate;
        words[end] = count;
        split[end] = start;
      }
    }
  }

  std::vector<std::string> out;
  for (std::size_t end = n; end > 0; end = split[end]) {
    out.emplace_back(body.substr(split[end], end - split[end]));
  }
  return {out.rbegin(), out.rend()};
}

std::string normalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool space = false;
  for (char c : text) {
    const bool keep = is_alnum(c) || c == '#' || c == '@';
    if (keep) {
      if (space && !out.empty()) out.push_back(' ');
      space = false;
      out.push_back(to_lower(c));
    } else {
      space = true;
    }
  }
  return out;
}

namespace {

// Replaces every `#word` with its segmentation; other text is copied.
std::string segment_hashtags_in(std::string_view text, const SegLexicon& lex,
                                PipelineStats* stats) {
  std::string out;
  out.reserve(text.size() + 8);
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '#') {
      out.push_back(text[i]);
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < text.size() && is_alnum(text[j])) ++j;
    if (j == i + 1) {
      out.push_back(' ');
      ++i;
      continue;
    }
    out.push_back(' ');
    for (const auto& word : segment_hashtag(text.substr(i, j - i), lex)) {
      out.append(word);
      out.push_back(' ');
    }
    if (stats) ++stats->hashtags_segmented;
    i = j;
  }
  return out;
}

}  // namespace

TokenSeq preprocess(std::string_view text, const PipelineResources& res, PipelineStats* stats) {
  std::string stage = map_emoticons(text, res.emoticons, stats);
  stage = expand_contractions(stage, res.contractions, stats);
  stage = segment_hashtags_in(stage, res.lexicon, stats);
  stage = normalize(stage);
  for (char& c : stage)
    if (c == '#' || c == '@') c = ' ';

  TokenSeq tokens;
  for (auto& token : split_whitespace(stage)) {
    if (const std::string* expansion = res.misspellings.find(token)) {
      for (auto& word : split_whitespace(*expansion)) tokens.push_back(std::move(word));
      if (stats) ++stats->misspellings_expanded;
    } else {
      tokens.push_back(std::move(token));
    }
  }
  return tokens;
}

std::string join_tokens(const TokenSeq& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.append(sep);
    out.append(tokens[i]);
  }
  return out;
}

}  // namespace hatelab
