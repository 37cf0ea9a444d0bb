#pragma once

#include "hatelab/data.hpp"
#include "hatelab/metrics.hpp"
#include "hatelab/model.hpp"
#include "hatelab/text_pipeline.hpp"

#include <span>
#include <string>
#include <vector>

namespace hatelab {

/// Tokenised view of a dataset. The character branch reads the joined
/// tokens, so both branches see the same cleaned text.
struct PreparedCorpus {
  std::vector<TokenSeq> tokens;
  std::vector<std::string> char_texts;
  std::vector<std::int32_t> labels;
  std::vector<std::string> label_names;

  std::size_t size() const { return tokens.size(); }
};

/// With `resources` the full cleaning pipeline runs; without it only
/// normalisation and whitespace splitting.
PreparedCorpus prepare_corpus(const Dataset& dataset, const PipelineResources* resources,
                              PipelineStats* stats = nullptr);

std::vector<Example> encode_examples(const PreparedCorpus& corpus,
                                     std::span<const std::size_t> indices, const Vocab& vocab,
                                     std::size_t max_len);

struct FittedModel {
  Classifier<float> model;
  TrainHistory history;
};

/// Builds the vocabulary on `train_indices` only and trains from scratch.
FittedModel fit_model(const ModelConfig& config, const PreparedCorpus& corpus,
                      std::span<const std::size_t> train_indices,
                      const PretrainedEmbeddings* pretrained);

ConfusionMatrix evaluate_model(const Classifier<float>& model, const PreparedCorpus& corpus,
                               std::span<const std::size_t> indices);

struct CvAggregate {
  double mean_accuracy = 0.0;
  double mean_weighted_f1 = 0.0;
  ConfusionMatrix pooled;
  double pooled_accuracy = 0.0;
  double pooled_weighted_f1 = 0.0;
};

CvAggregate aggregate_folds(std::span<const FoldResult> folds);

struct CvResult {
  std::vector<FoldResult> folds;
  std::vector<TrainHistory> histories;
  CvAggregate aggregate;
};

/// Fold f trains with seed derive_seed(seed, kFoldRun + f). Results are
/// independent of `jobs`.
CvResult run_cv(const ModelConfig& config, const PreparedCorpus& corpus, std::size_t k,
                std::uint64_t seed, const PretrainedEmbeddings* pretrained, std::size_t jobs = 1);

std::vector<std::size_t> all_indices(std::size_t n);

}  // namespace hatelab
