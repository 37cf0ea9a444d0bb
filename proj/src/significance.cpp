#include "hatelab/significance.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace hatelab {

namespace {

double pooled_f1(std::span<const ConfusionMatrix> folds) {
  ConfusionMatrix sum(folds.front().classes());
  for (const auto& cm : folds) sum += cm;
  return weighted_f1(sum);
}

}  // namespace

Winner winner(std::span<const ConfusionMatrix> a, std::span<const ConfusionMatrix> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("winner needs at least one fold per system");
  return pooled_f1(a) >= pooled_f1(b) ? Winner::kA : Winner::kB;
}

BootstrapResult bootstrap_compare(const SystemFolds& a, const SystemFolds& b,
                                  std::size_t subset_size) {
  const std::size_t k = a.folds.size();
  if (k != b.folds.size()) {
    throw std::invalid_argument("fold counts differ: " + a.id + " has " + std::to_string(k) +
                                ", " + b.id + " has " + std::to_string(b.folds.size()));
  }
  if (subset_size == 0 || subset_size > k) {
    throw std::invalid_argument("subset size " + std::to_string(subset_size) +
                                " must be in [1, " + std::to_string(k) + "]");
  }
  for (std::size_t f = 0; f < k; ++f) {
    if (a.folds[f].classes() != b.folds[f].classes() ||
        a.folds[f].classes() != a.folds.front().classes()) {
      throw std::invalid_argument("class counts differ at fold " + std::to_string(f));
    }
  }

  BootstrapResult r;
  r.subset_size = subset_size;
  r.full_winner = winner(a.folds, b.folds);

  // Selector with subset_size leading ones; prev_permutation walks every combination.
  std::vector<char> select(k, 0);
  std::fill_n(select.begin(), subset_size, 1);
  std::vector<ConfusionMatrix> sa, sb;
  do {
    sa.clear();
    sb.clear();
    for (std::size_t f = 0; f < k; ++f) {
      if (!select[f]) continue;
      sa.push_back(a.folds[f]);
      sb.push_back(b.folds[f]);
    }
    ++r.subset_count;
    if (winner(sa, sb) != r.full_winner) ++r.disagreements;
  } while (std::prev_permutation(select.begin(), select.end()));

  r.p_value = static_cast<double>(r.disagreements) / static_cast<double>(r.subset_count);
  return r;
}

SystemFolds system_folds_from_report(const nlohmann::json& report) {
  SystemFolds s;
  if (!report.is_object() || !report.contains("folds") || !report["folds"].is_array()) {
    throw std::invalid_argument("report has no folds array");
  }
  s.id = report.value("system", std::string("unnamed"));
  for (const auto& fold : report["folds"]) {
    if (!fold.contains("confusion")) throw std::invalid_argument("fold without a confusion matrix");
    s.folds.push_back(
        ConfusionMatrix::from_rows(fold["confusion"].get<std::vector<std::vector<std::int64_t>>>()));
  }
  if (s.folds.empty()) throw std::invalid_argument("report has no folds");
  return s;
}

SystemFolds load_system_folds(const std::filesystem::path& report_path) {
  std::ifstream in(report_path);
  if (!in) throw std::runtime_error("cannot open " + report_path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(report_path.string() + ": " + e.what());
  }
  return system_folds_from_report(j);
}

nlohmann::json comparison_to_json(const BootstrapResult& result, const SystemFolds& a,
                                  const SystemFolds& b) {
  const std::string& w = result.full_winner == Winner::kA ? a.id : b.id;
  return {{"system_a", a.id},
          {"system_b", b.id},
          {"full_winner", w},
          {"full_winner_side", result.full_winner == Winner::kA ? "a" : "b"},
          {"subset_size", result.subset_size},
          {"subset_count", result.subset_count},
          {"disagreements", result.disagreements},
          {"p_value", result.p_value}};
}

}  // namespace hatelab
