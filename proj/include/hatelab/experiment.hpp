#pragma once

#include "hatelab/report.hpp"

#include "json.hpp"

#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hatelab {

/// Every schema violation found in one spec.
class SpecError : public std::runtime_error {
 public:
  explicit SpecError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Flat JSON object. Relative paths resolve against the spec's directory.
///   dataset | synthetic      CSV file, or synthetic-corpus spec
///   test_dataset             optional held-out CSV
///   text_column, label_column, id_column
///   preprocess               bool, default true
///   fixtures                 optional lexicon directory
///   synthetic_n, synthetic_noise
///   preset, name, arch, embedding{kind,path,dim}, max_len, hidden, windows,
///   filters, char_filters, dropout, batch, epochs, lr, min_freq
///   k_folds                  default 5
///   seed                     required
///   output_dir               required
struct ExperimentSpec {
  std::filesystem::path dataset;
  std::filesystem::path synthetic;
  std::filesystem::path test_dataset;
  std::filesystem::path fixtures;
  CsvColumns columns;
  bool preprocess = true;
  std::optional<std::size_t> synthetic_n;
  std::optional<double> synthetic_noise;
  ModelConfig model;
  std::size_t k_folds = 5;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
};

ExperimentSpec parse_experiment_spec(const nlohmann::json& j, const std::filesystem::path& base_dir);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

struct ExperimentOutcome {
  ExperimentReport report;
  Classifier<float> final_model;
};

/// Cross-validates, then trains the final model on the full dataset (and
/// scores it on test_dataset when given). Progress lines go to `log`.
ExperimentOutcome run_experiment(const ExperimentSpec& spec, std::size_t jobs = 1,
                                 std::ostream* log = nullptr);

}  // namespace hatelab
