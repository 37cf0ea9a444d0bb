#pragma once

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hatelab {

struct Document {
  std::string id;
  std::string text;
  std::int32_t label = 0;
};

struct Dataset {
  std::vector<Document> documents;
  std::vector<std::string> label_names;

  std::size_t classes() const { return label_names.size(); }
  std::size_t size() const { return documents.size(); }
  std::vector<std::int32_t> labels() const;
  /// Index of `name` in label_names, or nullopt.
  std::optional<std::int32_t> label_index(std::string_view name) const;
};

/// All row-level problems found while loading, with 1-based data row numbers.
class DatasetError : public std::runtime_error {
 public:
  DatasetError(const std::string& what, std::vector<std::size_t> rows = {})
      : std::runtime_error(what), rows_(std::move(rows)) {}
  const std::vector<std::size_t>& rows() const { return rows_; }

 private:
  std::vector<std::size_t> rows_;
};

struct CsvColumns {
  std::string text = "text";
  std::string label = "label";
  /// Optional; row numbers are used as ids when the column is absent.
  std::string id = "id";
};

/// RFC-4180 CSV with a header row. Label names are collected in order of
/// first appearance unless `fixed_labels` is given, in which case every
/// label must be one of them (used for held-out test files).
Dataset load_dataset_csv(const std::filesystem::path& path, const CsvColumns& columns = {},
                         const std::vector<std::string>* fixed_labels = nullptr);

struct FoldSplit {
  std::vector<std::vector<std::size_t>> folds;

  std::size_t k() const { return folds.size(); }
  /// All indices outside fold `held_out`, ascending.
  std::vector<std::size_t> training_indices(std::size_t held_out) const;
};

/// Per class: shuffle member indices with `seed`, then deal them to folds in
/// round-robin order, continuing the rotation across classes.
FoldSplit stratified_kfold(std::span<const std::int32_t> labels, std::size_t num_classes,
                           std::size_t k, std::uint64_t seed,
                           const std::vector<std::string>* label_names = nullptr);
FoldSplit stratified_kfold(const Dataset& dataset, std::size_t k, std::uint64_t seed);

/// Epoch-seeded shuffle of `indices`, cut into batches; the final batch may
/// be partial.
std::vector<std::vector<std::size_t>> make_batches(std::span<const std::size_t> indices,
                                                   std::size_t batch_size, std::uint64_t seed,
                                                   std::uint64_t epoch);

struct SyntheticClass {
  std::string name;
  std::vector<std::string> tokens;
  std::vector<std::string> motifs;
};

struct SyntheticSpec {
  std::vector<SyntheticClass> classes;
  /// Class-neutral tokens shared by every class.
  std::vector<std::string> filler_tokens;
  double filler_rate = 0.3;
  /// Relative class sizes; empty means balanced.
  std::vector<double> weights;
  std::size_t min_tokens = 5;
  std::size_t max_tokens = 15;
  // Defaults used when a spec file drives an experiment directly.
  std::size_t n = 300;
  double noise_rate = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);
SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);

/// Each document draws min..max tokens: filler with probability
/// filler_rate, otherwise a signal token from its own class (or, with
/// probability `noise_rate`, from another class). At least one own-class
/// token is always present, and one of the class's motifs is inserted when
/// the class defines any.
Dataset generate_synthetic(const SyntheticSpec& spec, std::size_t n, double noise_rate,
                           std::uint64_t seed);

}  // namespace hatelab
