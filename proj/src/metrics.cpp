#include "hatelab/metrics.hpp"

#include <stdexcept>
#include <string>

namespace hatelab {

ConfusionMatrix::ConfusionMatrix(std::size_t classes) : k_(classes), counts_(classes * classes, 0) {}

ConfusionMatrix ConfusionMatrix::from_rows(const std::vector<std::vector<std::int64_t>>& rows) {
  ConfusionMatrix cm(rows.size());
  for (std::size_t g = 0; g < rows.size(); ++g) {
    if (rows[g].size() != rows.size()) throw std::invalid_argument("confusion matrix must be square");
    for (std::size_t p = 0; p < rows.size(); ++p) {
      if (rows[g][p] < 0) throw std::invalid_argument("confusion counts must be non-negative");
      cm.counts_[g * cm.k_ + p] = rows[g][p];
    }
  }
  return cm;
}

void ConfusionMatrix::add(std::size_t gold, std::size_t pred, std::int64_t count) {
  if (gold >= k_ || pred >= k_) throw std::out_of_range("confusion matrix class out of range");
  counts_[gold * k_ + pred] += count;
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t s = 0;
  for (auto c : counts_) s += c;
  return s;
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < k_; ++i) s += at(i, i);
  return s;
}

std::int64_t ConfusionMatrix::row_sum(std::size_t gold) const {
  std::int64_t s = 0;
  for (std::size_t p = 0; p < k_; ++p) s += at(gold, p);
  return s;
}

std::int64_t ConfusionMatrix::col_sum(std::size_t pred) const {
  std::int64_t s = 0;
  for (std::size_t g = 0; g < k_; ++g) s += at(g, pred);
  return s;
}

std::vector<std::vector<std::int64_t>> ConfusionMatrix::rows() const {
  std::vector<std::vector<std::int64_t>> out(k_, std::vector<std::int64_t>(k_));
  for (std::size_t g = 0; g < k_; ++g)
    for (std::size_t p = 0; p < k_; ++p) out[g][p] = at(g, p);
  return out;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.k_ != k_) throw std::invalid_argument("cannot add confusion matrices of different size");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

ConfusionMatrix confusion_matrix(std::span<const std::int32_t> golds,
                                 std::span<const std::int32_t> preds, std::size_t classes) {
  if (golds.size() != preds.size()) throw std::invalid_argument("gold and prediction lengths differ");
  ConfusionMatrix cm(classes);
  for (std::size_t i = 0; i < golds.size(); ++i) {
    if (golds[i] < 0 || preds[i] < 0) throw std::out_of_range("negative class index");
    cm.add(static_cast<std::size_t>(golds[i]), static_cast<std::size_t>(preds[i]));
  }
  return cm;
}

double accuracy_of(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total <= 0) throw std::invalid_argument("accuracy of an empty confusion matrix");
  return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

double weighted_f1(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total <= 0) throw std::invalid_argument("weighted F1 of an empty confusion matrix");
  double sum = 0.0;
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    const auto tp = static_cast<double>(cm.at(c, c));
    const auto support = static_cast<double>(cm.row_sum(c));
    const auto predicted = static_cast<double>(cm.col_sum(c));
    const double precision = predicted > 0 ? tp / predicted : 0.0;
    const double recall = support > 0 ? tp / support : 0.0;
    const double f1 =
        precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    sum += support * f1;
  }
  return sum / static_cast<double>(total);
}

std::vector<ClassRates> class_rates(const ConfusionMatrix& cm) {
  if (cm.total() <= 0) throw std::invalid_argument("class rates of an empty confusion matrix");
  std::vector<ClassRates> out(cm.classes());
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    const auto tp = static_cast<double>(cm.at(c, c));
    const auto support = static_cast<double>(cm.row_sum(c));
    const auto predicted = static_cast<double>(cm.col_sum(c));
    ClassRates& r = out[c];
    if (support > 0) {
      r.true_positive = 100.0 * tp / support;
      r.false_negative = 100.0 - r.true_positive;
    }
    if (predicted > 0) r.false_positive = 100.0 * (predicted - tp) / predicted;
  }
  return out;
}

FoldResult make_fold_result(std::size_t fold, ConfusionMatrix cm) {
  FoldResult r;
  r.fold = fold;
  r.accuracy = accuracy_of(cm);
  r.weighted_f1 = weighted_f1(cm);
  r.confusion = std::move(cm);
  return r;
}

}  // namespace hatelab
