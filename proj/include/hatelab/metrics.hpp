#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace hatelab {

/// k x k counts; rows are gold classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes = 0);
  /// Throws unless `rows` is square with non-negative entries.
  static ConfusionMatrix from_rows(const std::vector<std::vector<std::int64_t>>& rows);

  std::size_t classes() const { return k_; }
  std::int64_t at(std::size_t gold, std::size_t pred) const { return counts_[gold * k_ + pred]; }
  void add(std::size_t gold, std::size_t pred, std::int64_t count = 1);

  std::int64_t total() const;
  std::int64_t trace() const;
  std::int64_t row_sum(std::size_t gold) const;
  std::int64_t col_sum(std::size_t pred) const;
  std::vector<std::vector<std::int64_t>> rows() const;

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t k_ = 0;
  std::vector<std::int64_t> counts_;
};

ConfusionMatrix confusion_matrix(std::span<const std::int32_t> golds,
                                 std::span<const std::int32_t> preds, std::size_t classes);

/// trace / total. Throws on an empty matrix.
double accuracy_of(const ConfusionMatrix& cm);

/// Per-class F1 = 2PR/(P+R) with P = diag/colsum and R = diag/rowsum
/// (0 when a denominator vanishes), averaged with gold-support weights.
double weighted_f1(const ConfusionMatrix& cm);

/// Per-class percentages: TP = 100 diag/rowsum, FN = 100 - TP and
/// FP = 100 (colsum - diag)/colsum, i.e. the share of a class's predictions
/// that are wrong. Vanishing denominators give 0.
struct ClassRates {
  double true_positive = 0.0;
  double false_positive = 0.0;
  double false_negative = 0.0;
};

std::vector<ClassRates> class_rates(const ConfusionMatrix& cm);

struct FoldResult {
  std::size_t fold = 0;
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  double weighted_f1 = 0.0;
};

FoldResult make_fold_result(std::size_t fold, ConfusionMatrix cm);

}  // namespace hatelab
