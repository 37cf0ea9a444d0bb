#include "hatelab/cross_validation.hpp"

#include "hatelab/random.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace hatelab {

namespace {

TokenSeq split_normalized(std::string_view text) {
  TokenSeq out;
  std::string norm = normalize(text);
  for (char& c : norm)
    if (c == '#' || c == '@') c = ' ';
  std::size_t start = 0;
  while (start < norm.size()) {
    std::size_t end = norm.find(' ', start);
    if (end == std::string::npos) end = norm.size();
    if (end > start) out.emplace_back(norm.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

}  // namespace

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

PreparedCorpus prepare_corpus(const Dataset& dataset, const PipelineResources* resources,
                              PipelineStats* stats) {
  PreparedCorpus c;
  c.label_names = dataset.label_names;
  c.tokens.reserve(dataset.size());
  for (const auto& doc : dataset.documents) {
    TokenSeq toks = resources ? preprocess(doc.text, *resources, stats) : split_normalized(doc.text);
    c.char_texts.push_back(join_tokens(toks));
    c.tokens.push_back(std::move(toks));
    c.labels.push_back(doc.label);
  }
  return c;
}

std::vector<Example> encode_examples(const PreparedCorpus& corpus,
                                     std::span<const std::size_t> indices, const Vocab& vocab,
                                     std::size_t max_len) {
  std::vector<Example> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    out.push_back(make_example(corpus.tokens.at(i), corpus.char_texts[i], corpus.labels[i], vocab,
                               max_len));
  }
  return out;
}

FittedModel fit_model(const ModelConfig& config, const PreparedCorpus& corpus,
                      std::span<const std::size_t> train_indices,
                      const PretrainedEmbeddings* pretrained) {
  std::vector<TokenSeq> train_tokens;
  train_tokens.reserve(train_indices.size());
  for (std::size_t i : train_indices) train_tokens.push_back(corpus.tokens.at(i));
  Vocab vocab = build_vocab(train_tokens, config.min_freq);
  FittedModel fitted{Classifier<float>(config, std::move(vocab), pretrained), {}};
  const auto train = encode_examples(corpus, train_indices, fitted.model.vocab(), config.max_len);
  fitted.history = train_model(fitted.model, std::span<const Example>(train));
  return fitted;
}

ConfusionMatrix evaluate_model(const Classifier<float>& model, const PreparedCorpus& corpus,
                               std::span<const std::size_t> indices) {
  const auto examples = encode_examples(corpus, indices, model.vocab(), model.config().max_len);
  const auto preds = model.predict(examples);
  std::vector<std::int32_t> golds;
  golds.reserve(examples.size());
  for (const auto& e : examples) golds.push_back(e.label);
  return confusion_matrix(golds, preds, model.config().classes);
}

CvAggregate aggregate_folds(std::span<const FoldResult> folds) {
  if (folds.empty()) throw std::invalid_argument("no folds to aggregate");
  CvAggregate a;
  a.pooled = ConfusionMatrix(folds.front().confusion.classes());
  for (const auto& f : folds) {
    a.mean_accuracy += f.accuracy;
    a.mean_weighted_f1 += f.weighted_f1;
    a.pooled += f.confusion;
  }
  a.mean_accuracy /= static_cast<double>(folds.size());
  a.mean_weighted_f1 /= static_cast<double>(folds.size());
  a.pooled_accuracy = accuracy_of(a.pooled);
  a.pooled_weighted_f1 = weighted_f1(a.pooled);
  return a;
}

CvResult run_cv(const ModelConfig& config, const PreparedCorpus& corpus, std::size_t k,
                std::uint64_t seed, const PretrainedEmbeddings* pretrained, std::size_t jobs) {
  if (config.classes != corpus.label_names.size()) {
    throw std::invalid_argument("model has " + std::to_string(config.classes) +
                                " classes but the corpus has " +
                                std::to_string(corpus.label_names.size()));
  }
  const FoldSplit split =
      stratified_kfold(corpus.labels, corpus.label_names.size(), k, seed, &corpus.label_names);

  CvResult result;
  result.folds.resize(k);
  result.histories.resize(k);

  auto run_fold = [&](std::size_t f) {
    ModelConfig fold_config = config;
    fold_config.seed = derive_seed(seed, streams::kFoldRun + f);
    const auto train_idx = split.training_indices(f);
    FittedModel fitted = fit_model(fold_config, corpus, train_idx, pretrained);
    result.histories[f] = std::move(fitted.history);
    result.folds[f] = make_fold_result(f, evaluate_model(fitted.model, corpus, split.folds[f]));
  };

  jobs = std::max<std::size_t>(1, std::min(jobs, k));
  if (jobs == 1) {
    for (std::size_t f = 0; f < k; ++f) run_fold(f);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) {
      pool.emplace_back([&] {
        for (std::size_t f = next++; f < k; f = next++) {
          try {
            run_fold(f);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }
  result.aggregate = aggregate_folds(result.folds);
  return result;
}

}  // namespace hatelab
