#include "doctest.h"

#include "support/corpora.hpp"
#include "support/oracles.hpp"

#include "hatelab/model.hpp"

#include <random>

using namespace hatelab;
using testing::all_archs;
using testing::tiny_config;

namespace {

std::vector<const Example*> pointers(const std::vector<Example>& v) {
  std::vector<const Example*> p;
  for (const auto& e : v) p.push_back(&e);
  return p;
}

}  // namespace

TEST_SUITE("models") {
  TEST_CASE("arch names round-trip") {
    for (Arch a : all_archs()) CHECK(parse_arch(arch_name(a)) == a);
    CHECK_THROWS(parse_arch("transformer"));
  }

  TEST_CASE("geometry") {
    CHECK(charcnn::stage_lengths() == std::array<std::size_t, 5>{256, 64, 21, 9, 3});
    ModelConfig cnn;
    cnn.arch = Arch::kCnn;
    CHECK(word_feature_width(cnn) == 300);
    ModelConfig bi;
    bi.arch = Arch::kBiLstm;
    CHECK(word_feature_width(bi) == 200);
    for (const auto& c : preset_configs()) {
      if (uses_words(c.arch) && uses_chars(c.arch))
        CHECK(head_input_width(c) == word_feature_width(c) + 64);
    }
  }

  TEST_CASE("results-table presets") {
    const auto all = preset_configs();
    REQUIRE(all.size() == 13);
    CHECK(all[11].name == "BiLSTM(Glove)+CharCNN");
    CHECK(preset_config("12").name == all[11].name);
    CHECK(preset_config("CharCNN").arch == Arch::kCharCnn);
    CHECK_THROWS(preset_config("14"));
    for (const auto& c : all) {
      CHECK(c.hidden == 100);
      CHECK(c.batch == 32);
      CHECK(c.epochs == 5);
    }
  }

  TEST_CASE("config json round-trip and validation") {
    ModelConfig c = tiny_config(Arch::kBiLstmCharCnn);
    c.embedding.path = "x.txt";
    const ModelConfig back = config_from_json(config_to_json(c));
    CHECK(config_to_json(back) == config_to_json(c));
    c.batch = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  }

  TEST_CASE("every preset builds, takes a step and predicts on a toy set") {
    const auto corpus = testing::random_corpus(20, 1);
    const Vocab vocab = build_vocab(corpus);
    for (ModelConfig c : preset_configs()) {
      CAPTURE(c.name);
      c.classes = 3;
      c.seed = 5;
      const auto ex = testing::make_examples(corpus, vocab, 3, c.max_len, 2);
      Classifier<float> m(c, vocab);
      CHECK(m.feature_width() == head_input_width(c));
      Rng rng(1);
      const auto batch = pointers(ex);
      m.zero_grad();
      const double loss = m.accumulate_gradients(batch, nn::Mode::kTraining, rng);
      CHECK(std::isfinite(loss));
      auto params = m.parameters();
      nn::adam_step<float>(params, m.optimizer());
      const auto preds = m.predict(ex);
      CHECK(preds.size() == ex.size());
      for (auto p : preds) CHECK((p >= 0 && p < 3));
    }
  }

  TEST_CASE("end-to-end gradient check on the input-side weights") {
    const auto corpus = testing::random_corpus(5, 3, 6);
    const Vocab vocab = build_vocab(corpus);
    for (Arch a : all_archs()) {
      CAPTURE(arch_name(a));
      ModelConfig c = tiny_config(a);
      Classifier<double> m(c, vocab);
      const auto ex = testing::make_examples(corpus, vocab, 3, c.max_len, 4);
      const auto batch = pointers(ex);
      std::vector<std::int32_t> golds;
      for (const auto& e : ex) golds.push_back(e.label);

      Param<double>& target = uses_words(a) ? m.embedding() : *m.parameters().front();
      Rng rng(0);
      m.zero_grad();
      m.accumulate_gradients(batch, nn::Mode::kInference, rng);
      const Matrix<double> analytic = target.grad;

      auto loss = [&] { return nn::softmax_xent_batch<double>(m.logits(batch), golds).mean_loss; };
      std::mt19937_64 pick(17);
      std::vector<double*> entries;
      std::vector<std::pair<Eigen::Index, Eigen::Index>> where;
      while (entries.size() < 10) {
        // Rows 1.. are reachable for the embedding (row 0 is padding and never trained).
        const Eigen::Index r = uses_words(a) ? 1 + static_cast<Eigen::Index>(pick() % (target.value.rows() - 1))
                                             : static_cast<Eigen::Index>(pick() % target.value.rows());
        const Eigen::Index col = static_cast<Eigen::Index>(pick() % target.value.cols());
        entries.push_back(&target.value(r, col));
        where.emplace_back(r, col);
      }
      const auto numeric = testing::numeric_gradient(loss, entries);
      for (std::size_t i = 0; i < entries.size(); ++i)
        CHECK(testing::rel_err(analytic(where[i].first, where[i].second), numeric[i]) < 1e-3);
      if (uses_words(a)) CHECK(analytic.row(0).isZero());
    }
  }

  TEST_CASE("same seed gives bit-identical trained parameters") {
    const auto corpus = testing::random_corpus(24, 8);
    const Vocab vocab = build_vocab(corpus);
    for (Arch a : all_archs()) {
      ModelConfig c = tiny_config(a);
      c.dropout = 0.3;
      c.epochs = 2;
      const auto ex = testing::make_examples(corpus, vocab, 3, c.max_len, 1);
      Classifier<float> m1(c, vocab), m2(c, vocab);
      const auto h1 = train_model(m1, std::span<const Example>(ex));
      const auto h2 = train_model(m2, std::span<const Example>(ex));
      CHECK(h1.epoch_loss == h2.epoch_loss);
      const auto p1 = m1.parameters();
      const auto p2 = m2.parameters();
      for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i]->value == p2[i]->value);
    }
  }

  TEST_CASE("one epoch over one batch is one optimizer step") {
    const auto corpus = testing::random_corpus(4, 2);
    const Vocab vocab = build_vocab(corpus);
    ModelConfig c = tiny_config(Arch::kLstm);
    c.batch = 8;
    Classifier<float> m(c, vocab);
    const auto ex = testing::make_examples(corpus, vocab, 3, c.max_len, 1);
    train_model(m, std::span<const Example>(ex));
    CHECK(m.optimizer().t == 1);
  }

  TEST_CASE("training rejects out-of-range labels") {
    const auto corpus = testing::random_corpus(4, 2);
    const Vocab vocab = build_vocab(corpus);
    Classifier<float> m(tiny_config(Arch::kCnn), vocab);
    auto ex = testing::make_examples(corpus, vocab, 3, 8, 1);
    ex[2].label = 3;
    CHECK_THROWS_AS(train_model(m, std::span<const Example>(ex)), std::invalid_argument);
  }

  TEST_CASE("predict ties and batching") {
    RowVector<float> tie = RowVector<float>::Zero(3);
    CHECK(argmax_row<float>(tie) == 0);
    RowVector<float> later(3);
    later << 0.1f, 0.5f, 0.5f;
    CHECK(argmax_row<float>(later) == 1);

    const auto corpus = testing::random_corpus(150, 4);
    const Vocab vocab = build_vocab(corpus);
    for (Arch a : all_archs()) {
      Classifier<float> m(tiny_config(a), vocab);
      const auto ex = testing::make_examples(corpus, vocab, 3, 8, 2);
      const auto all = m.predict(ex);
      std::vector<std::int32_t> one_by_one;
      for (const auto& e : ex) one_by_one.push_back(m.predict(std::span<const Example>(&e, 1)).front());
      CHECK(all == one_by_one);
    }
  }

  TEST_CASE("a single example is memorised after 50 steps") {
    const std::vector<TokenSeq> corpus{{"golf", "hotel", "india"}};
    const Vocab vocab = build_vocab(corpus);
    for (Arch a : all_archs()) {
      ModelConfig c = tiny_config(a);
      c.epochs = 50;
      c.lr = 0.01;
      Classifier<float> m(c, vocab);
      const std::vector<Example> ex{make_example(corpus[0], "golf hotel india", 2, vocab, c.max_len)};
      train_model(m, std::span<const Example>(ex));
      CHECK(m.predict(ex).front() == 2);
    }
  }

  TEST_CASE("epoch loss falls on the separable synthetic corpus") {
    const auto corpus = testing::synthetic_corpus(120);
    std::vector<std::size_t> idx(corpus.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    ModelConfig c = tiny_config(Arch::kCnn);
    c.embedding.dim = 16;
    c.max_len = 20;
    c.filters = 8;
    c.epochs = 5;
    c.batch = 16;
    c.dropout = 0.2;
    const auto fitted = fit_model(c, corpus, idx, nullptr);
    const auto& loss = fitted.history.epoch_loss;
    REQUIRE(loss.size() == 5);
    CHECK(loss.back() < loss.front());
  }
}
