#include "hatelab/data.hpp"

#include "hatelab/csv.hpp"
#include "hatelab/random.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_set>

namespace hatelab {
namespace {

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  });
}

std::string join_rows(const std::vector<std::size_t>& rows) {
  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(rows[i]);
  }
  return out;
}

}  // namespace

std::vector<std::int32_t> Dataset::labels() const {
  std::vector<std::int32_t> out;
  out.reserve(documents.size());
  for (const auto& doc : documents) out.push_back(doc.label);
  return out;
}

std::optional<std::int32_t> Dataset::label_index(std::string_view name) const {
  for (std::size_t i = 0; i < label_names.size(); ++i)
    if (label_names[i] == name) return static_cast<std::int32_t>(i);
  return std::nullopt;
}

Dataset load_dataset_csv(const std::filesystem::path& path, const CsvColumns& columns,
                         const std::vector<std::string>* fixed_labels) {
  const auto records = csv::read_file(path);
  if (records.empty()) throw DatasetError(path.string() + ": missing header row");
  const auto& header = records.front().fields;
  auto find_column = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto text_col = find_column(columns.text);
  const auto label_col = find_column(columns.label);
  const auto id_col = find_column(columns.id);
  if (!text_col) throw DatasetError(path.string() + ": missing column '" + columns.text + "'");
  if (!label_col) throw DatasetError(path.string() + ": missing column '" + columns.label + "'");

  Dataset ds;
  if (fixed_labels) ds.label_names = *fixed_labels;
  std::vector<std::size_t> empty_text, malformed, unknown_label;
  std::set<std::string> seen_ids;
  std::string duplicate;
  std::vector<std::size_t> duplicate_rows;

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& fields = records[r].fields;
    if (fields.size() != header.size()) {
      malformed.push_back(r);
      continue;
    }
    Document doc;
    doc.id = id_col ? fields[*id_col] : std::to_string(r);
    doc.text = fields[*text_col];
    const std::string& label = fields[*label_col];
    if (is_blank(doc.text)) {
      empty_text.push_back(r);
      continue;
    }
    if (label.empty()) {
      malformed.push_back(r);
      continue;
    }
    if (!seen_ids.insert(doc.id).second) {
      if (duplicate.empty()) duplicate = doc.id;
      duplicate_rows.push_back(r);
      continue;
    }
    auto index = ds.label_index(label);
    if (!index) {
      if (fixed_labels) {
        unknown_label.push_back(r);
        continue;
      }
      ds.label_names.push_back(label);
      index = static_cast<std::int32_t>(ds.label_names.size() - 1);
    }
    doc.label = *index;
    ds.documents.push_back(std::move(doc));
  }

  std::string problems;
  std::vector<std::size_t> bad_rows;
  auto note = [&](const std::string& what, const std::vector<std::size_t>& rows) {
    if (rows.empty()) return;
    problems += (problems.empty() ? "" : "; ") + what + " at rows " + join_rows(rows);
    bad_rows.insert(bad_rows.end(), rows.begin(), rows.end());
  };
  note("empty text", empty_text);
  note("malformed row", malformed);
  note("unknown label", unknown_label);
  if (!duplicate_rows.empty()) note("duplicate id '" + duplicate + "'", duplicate_rows);
  if (!problems.empty()) {
    std::sort(bad_rows.begin(), bad_rows.end());
    throw DatasetError(path.string() + ": " + problems, bad_rows);
  }
  return ds;
}

std::vector<std::size_t> FoldSplit::training_indices(std::size_t held_out) const {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < folds.size(); ++f)
    if (f != held_out) out.insert(out.end(), folds[f].begin(), folds[f].end());
  std::sort(out.begin(), out.end());
  return out;
}

FoldSplit stratified_kfold(std::span<const std::int32_t> labels, std::size_t num_classes,
                           std::size_t k, std::uint64_t seed,
                           const std::vector<std::string>* label_names) {
  if (k < 2) throw std::invalid_argument("k must be at least 2");
  std::vector<std::vector<std::size_t>> members(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
      throw std::invalid_argument("label out of range at index " + std::to_string(i));
    }
    members[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (members[c].size() < k) {
      const std::string name = (label_names && c < label_names->size())
                                   ? (*label_names)[c]
                                   : "class " + std::to_string(c);
      throw std::invalid_argument("class '" + name + "' has " + std::to_string(members[c].size()) +
                                  " examples, fewer than k=" + std::to_string(k));
    }
  }

  FoldSplit split;
  split.folds.resize(k);
  Rng rng(derive_seed(seed, streams::kFolds));
  std::size_t next = 0;
  for (auto& group : members) {
    std::shuffle(group.begin(), group.end(), rng);
    for (std::size_t idx : group) {
      split.folds[next].push_back(idx);
      next = (next + 1) % k;
    }
  }
  for (auto& fold : split.folds) std::sort(fold.begin(), fold.end());
  return split;
}

FoldSplit stratified_kfold(const Dataset& dataset, std::size_t k, std::uint64_t seed) {
  const auto labels = dataset.labels();
  return stratified_kfold(labels, dataset.classes(), k, seed, &dataset.label_names);
}

std::vector<std::vector<std::size_t>> make_batches(std::span<const std::size_t> indices,
                                                   std::size_t batch_size, std::uint64_t seed,
                                                   std::uint64_t epoch) {
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  std::vector<std::size_t> order(indices.begin(), indices.end());
  Rng rng(derive_seed(seed, epoch));
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

void SyntheticSpec::validate() const {
  if (classes.size() < 2) throw std::invalid_argument("synthetic spec needs at least 2 classes");
  std::set<std::string> names;
  std::unordered_set<std::string> seen;
  for (const auto& c : classes) {
    if (c.name.empty()) throw std::invalid_argument("synthetic class without a name");
    if (!names.insert(c.name).second) throw std::invalid_argument("duplicate class '" + c.name + "'");
    if (c.tokens.empty()) throw std::invalid_argument("class '" + c.name + "' has no tokens");
    for (const auto* list : {&c.tokens, &c.motifs}) {
      for (const auto& t : *list) {
        if (!seen.insert(t).second) {
          throw std::invalid_argument("token '" + t + "' is shared between signal vocabularies");
        }
      }
    }
  }
  for (const auto& t : filler_tokens) {
    if (seen.contains(t)) throw std::invalid_argument("filler token '" + t + "' is also a signal token");
  }
  if (!(filler_rate >= 0.0 && filler_rate < 1.0)) {
    throw std::invalid_argument("filler_rate must lie in [0, 1)");
  }
  if (filler_rate > 0.0 && filler_tokens.empty()) {
    throw std::invalid_argument("filler_rate > 0 requires filler tokens");
  }
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) throw std::invalid_argument("noise_rate must lie in [0, 1]");
  if (min_tokens < 1 || min_tokens > max_tokens) {
    throw std::invalid_argument("need 1 <= min_tokens <= max_tokens");
  }
  if (!weights.empty()) {
    if (weights.size() != classes.size()) throw std::invalid_argument("one weight per class required");
    for (double w : weights)
      if (!(w > 0.0)) throw std::invalid_argument("class weights must be positive");
  }
}

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
  SyntheticSpec spec;
  for (const auto& c : j.at("classes")) {
    SyntheticClass cls;
    cls.name = c.at("name").get<std::string>();
    cls.tokens = c.at("tokens").get<std::vector<std::string>>();
    if (c.contains("motifs")) cls.motifs = c.at("motifs").get<std::vector<std::string>>();
    spec.classes.push_back(std::move(cls));
  }
  auto read = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  read("filler_tokens", spec.filler_tokens);
  read("filler_rate", spec.filler_rate);
  read("weights", spec.weights);
  read("min_tokens", spec.min_tokens);
  read("max_tokens", spec.max_tokens);
  read("n", spec.n);
  read("noise_rate", spec.noise_rate);
  read("seed", spec.seed);
  spec.validate();
  return spec;
}

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open synthetic spec " + path.string());
  return synthetic_spec_from_json(nlohmann::json::parse(in));
}

Dataset generate_synthetic(const SyntheticSpec& spec, std::size_t n, double noise_rate,
                           std::uint64_t seed) {
  spec.validate();
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) throw std::invalid_argument("noise_rate must lie in [0, 1]");
  const std::size_t k = spec.classes.size();

  // Class sizes: balanced, or largest-remainder apportionment of the weights.
  std::vector<std::size_t> counts(k, n / k);
  if (spec.weights.empty()) {
    for (std::size_t c = 0; c < n % k; ++c) ++counts[c];
  } else {
    const double total = std::accumulate(spec.weights.begin(), spec.weights.end(), 0.0);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const double exact = static_cast<double>(n) * spec.weights[c] / total;
      counts[c] = static_cast<std::size_t>(exact);
      assigned += counts[c];
      remainders.emplace_back(exact - static_cast<double>(counts[c]), c);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++counts[remainders[i % k].second];
  }

  Rng rng(derive_seed(seed, streams::kSynthetic));
  std::vector<std::int32_t> labels;
  for (std::size_t c = 0; c < k; ++c) labels.insert(labels.end(), counts[c], static_cast<std::int32_t>(c));
  std::shuffle(labels.begin(), labels.end(), rng);

  auto pick = [&](const std::vector<std::string>& from) -> const std::string& {
    std::uniform_int_distribution<std::size_t> dist(0, from.size() - 1);
    return from[dist(rng)];
  };
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> length_dist(spec.min_tokens, spec.max_tokens);

  Dataset ds;
  for (const auto& c : spec.classes) ds.label_names.push_back(c.name);
  ds.documents.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto label = static_cast<std::size_t>(labels[i]);
    const SyntheticClass& own = spec.classes[label];
    const std::size_t len = length_dist(rng);
    std::vector<std::string> tokens;
    bool has_own = false;
    for (std::size_t t = 0; t < len; ++t) {
      if (unit(rng) < spec.filler_rate) {
        tokens.push_back(pick(spec.filler_tokens));
      } else if (noise_rate > 0.0 && unit(rng) < noise_rate) {
        std::uniform_int_distribution<std::size_t> other(0, k - 2);
        std::size_t c = other(rng);
        if (c >= label) ++c;
        tokens.push_back(pick(spec.classes[c].tokens));
      } else {
        tokens.push_back(pick(own.tokens));
        has_own = true;
      }
    }
    if (!has_own) {
      std::uniform_int_distribution<std::size_t> pos(0, len - 1);
      tokens[pos(rng)] = pick(own.tokens);
    }
    if (!own.motifs.empty()) {
      std::uniform_int_distribution<std::size_t> pos(0, tokens.size());
      const std::size_t at = pos(rng);
      tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(at), pick(own.motifs));
    }
    std::string text;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      if (t) text.push_back(' ');
      text += tokens[t];
    }
    char id[32];
    std::snprintf(id, sizeof id, "syn-%06zu", i);
    ds.documents.push_back(Document{id, std::move(text), labels[i]});
  }
  return ds;
}

}  // namespace hatelab
