#pragma once

#include "hatelab/cross_validation.hpp"
#include "hatelab/model.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hatelab {

struct HoldoutResult {
  FoldResult result;
  std::size_t train_size = 0;
};

struct ExperimentReport {
  std::string system;
  ModelConfig config;
  std::vector<std::string> label_names;
  std::size_t k_folds = 0;
  std::uint64_t seed = 0;
  bool preprocess = true;
  std::size_t documents = 0;
  PipelineStats stats;
  CvResult cv;
  std::optional<HoldoutResult> holdout;
};

nlohmann::json confusion_to_json(const ConfusionMatrix& cm);
nlohmann::json report_to_json(const ExperimentReport& report);

/// Aligned table with the results-table columns plus the pooled F1.
std::string format_report_table(const std::vector<const ExperimentReport*>& reports);

/// CSV with a gold\pred header row and one row per gold class.
std::string format_confusion_csv(const ConfusionMatrix& cm, const std::vector<std::string>& labels);

}  // namespace hatelab
