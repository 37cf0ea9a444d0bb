#pragma once

#include "hatelab/metrics.hpp"

#include "json.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hatelab {

/// One system's per-fold confusion matrices, in fold order.
struct SystemFolds {
  std::string id;
  std::vector<ConfusionMatrix> folds;
};

enum class Winner { kA, kB };

/// Sums each system's matrices and compares pooled weighted F1.
/// Exact ties go to `a`.
Winner winner(std::span<const ConfusionMatrix> a, std::span<const ConfusionMatrix> b);

struct BootstrapResult {
  double p_value = 0.0;
  Winner full_winner = Winner::kA;
  std::size_t subset_count = 0;
  std::size_t disagreements = 0;
  std::size_t subset_size = 0;
};

/// Evaluates the winner on every size-`subset_size` subset of the paired
/// folds; p is the fraction of subsets whose winner differs from the
/// winner on all folds.
BootstrapResult bootstrap_compare(const SystemFolds& a, const SystemFolds& b,
                                  std::size_t subset_size = 3);

/// Reads `system` and `folds[].confusion` from a report.json document.
SystemFolds system_folds_from_report(const nlohmann::json& report);
SystemFolds load_system_folds(const std::filesystem::path& report_path);

nlohmann::json comparison_to_json(const BootstrapResult& result, const SystemFolds& a,
                                  const SystemFolds& b);

}  // namespace hatelab
