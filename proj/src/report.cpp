#include "hatelab/report.hpp"

#include "hatelab/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace hatelab {

namespace {

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

nlohmann::json fold_to_json(const FoldResult& f, const std::vector<std::string>& labels) {
  nlohmann::json rates = nlohmann::json::array();
  const auto r = class_rates(f.confusion);
  for (std::size_t c = 0; c < r.size(); ++c) {
    rates.push_back({{"class", c < labels.size() ? labels[c] : std::to_string(c)},
                     {"true_positive_pct", r[c].true_positive},
                     {"false_positive_pct", r[c].false_positive},
                     {"false_negative_pct", r[c].false_negative}});
  }
  return {{"fold", f.fold},
          {"size", f.confusion.total()},
          {"confusion", confusion_to_json(f.confusion)},
          {"accuracy", f.accuracy},
          {"weighted_f1", f.weighted_f1},
          {"class_rates", rates}};
}

}  // namespace

nlohmann::json confusion_to_json(const ConfusionMatrix& cm) { return cm.rows(); }

nlohmann::json report_to_json(const ExperimentReport& rep) {
  nlohmann::json folds = nlohmann::json::array();
  for (std::size_t f = 0; f < rep.cv.folds.size(); ++f) {
    nlohmann::json j = fold_to_json(rep.cv.folds[f], rep.label_names);
    if (f < rep.cv.histories.size()) j["epoch_loss"] = rep.cv.histories[f].epoch_loss;
    folds.push_back(std::move(j));
  }
  const CvAggregate& a = rep.cv.aggregate;
  nlohmann::json out{
      {"system", rep.system},
      {"config", config_to_json(rep.config)},
      {"labels", rep.label_names},
      {"documents", rep.documents},
      {"k_folds", rep.k_folds},
      {"seed", rep.seed},
      {"preprocess", rep.preprocess},
      {"preprocessing",
       {{"emoticons_mapped", rep.stats.emoticons_mapped},
        {"contractions_expanded", rep.stats.contractions_expanded},
        {"hashtags_segmented", rep.stats.hashtags_segmented},
        {"misspellings_expanded", rep.stats.misspellings_expanded}}},
      {"folds", folds},
      {"aggregate",
       {{"mean_accuracy", a.mean_accuracy},
        {"mean_weighted_f1", a.mean_weighted_f1},
        {"pooled_confusion", confusion_to_json(a.pooled)},
        {"pooled_accuracy", a.pooled_accuracy},
        {"pooled_weighted_f1", a.pooled_weighted_f1}}},
  };
  if (rep.holdout) {
    out["holdout"] = fold_to_json(rep.holdout->result, rep.label_names);
    out["holdout"]["train_size"] = rep.holdout->train_size;
  }
  return out;
}

std::string format_report_table(const std::vector<const ExperimentReport*>& reports) {
  const std::vector<std::string> header{"Model", "Accuracy", "F1-Score", "F1 (pooled)"};
  std::vector<std::vector<std::string>> rows;
  for (const auto* r : reports) {
    const auto& a = r->cv.aggregate;
    rows.push_back({r->system, fixed2(100.0 * a.mean_accuracy), fixed2(100.0 * a.mean_weighted_f1),
                    fixed2(100.0 * a.pooled_weighted_f1)});
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : rows) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == 0) {
        out << row[c] << std::string(width[c] - row[c].size(), ' ');
      } else {
        out << "  " << std::string(width[c] - row[c].size(), ' ') << row[c];
      }
    }
    out << '\n';
  };
  emit(header);
  std::size_t total = 0;
  for (std::size_t w : width) total += w;
  out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
  for (const auto& row : rows) emit(row);
  return out.str();
}

std::string format_confusion_csv(const ConfusionMatrix& cm, const std::vector<std::string>& labels) {
  std::ostringstream out;
  auto name = [&](std::size_t c) { return c < labels.size() ? labels[c] : std::to_string(c); };
  std::vector<std::string> head{"gold\\pred"};
  for (std::size_t c = 0; c < cm.classes(); ++c) head.push_back(name(c));
  csv::write_row(out, head);
  for (std::size_t g = 0; g < cm.classes(); ++g) {
    std::vector<std::string> row{name(g)};
    for (std::size_t p = 0; p < cm.classes(); ++p) row.push_back(std::to_string(cm.at(g, p)));
    csv::write_row(out, row);
  }
  return out.str();
}

}  // namespace hatelab
