#include "doctest.h"

#include "support/corpora.hpp"
#include "support/scratch.hpp"

#include "hatelab/checkpoint.hpp"

using namespace hatelab;

namespace {

struct Trained {
  std::vector<TokenSeq> corpus = testing::random_corpus(100, 21);
  Vocab vocab = build_vocab(corpus);
  std::vector<Example> examples;
  Classifier<float> model;

  explicit Trained(Arch a)
      : examples(testing::make_examples(corpus, vocab, 3, 8, 4)),
        model(testing::tiny_config(a), vocab) {
    train_model(model, std::span<const Example>(examples));
  }
};

}  // namespace

TEST_SUITE("checkpoint") {
  TEST_CASE("round-trip keeps parameters and predictions bit-identical") {
    testing::ScratchDir dir("ckpt");
    for (Arch a : testing::all_archs()) {
      CAPTURE(arch_name(a));
      Trained t(a);
      save_checkpoint(t.model, dir / "m.hlck");
      const auto back = load_checkpoint(dir / "m.hlck");
      CHECK(config_to_json(back.config()) == config_to_json(t.model.config()));
      CHECK(back.vocab().corpus_tokens() == t.model.vocab().corpus_tokens());
      const auto pa = t.model.parameters();
      const auto pb = back.parameters();
      REQUIRE(pa.size() == pb.size());
      for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(pa[i]->name == pb[i]->name);
        CHECK(pa[i]->value == pb[i]->value);
      }
      CHECK(t.model.predict(t.examples) == back.predict(t.examples));
      CHECK(serialize_checkpoint(back) == serialize_checkpoint(t.model));
    }
  }

  TEST_CASE("corruption is detected") {
    Trained t(Arch::kLstm);
    const auto good = serialize_checkpoint(t.model);
    for (std::size_t pos : {std::size_t{20}, good.size() / 2, good.size() - 1}) {
      auto bad = good;
      bad[pos] ^= 0x01;
      CHECK_THROWS_AS(deserialize_checkpoint(bad), CheckpointChecksumError);
    }

    auto version = good;
    version[4] = 2;
    CHECK_THROWS_AS(deserialize_checkpoint(version), CheckpointVersionError);

    auto magic = good;
    magic[0] = 'X';
    CHECK_THROWS_AS(deserialize_checkpoint(magic), CheckpointFormatError);

    const std::vector<std::uint8_t> cut(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(good.size() - 9));
    CHECK_THROWS_AS(deserialize_checkpoint(cut), CheckpointTruncatedError);
    const std::vector<std::uint8_t> header_only(good.begin(), good.begin() + 10);
    CHECK_THROWS_AS(deserialize_checkpoint(header_only), CheckpointTruncatedError);
  }

  TEST_CASE("every single-byte flip is rejected") {
    Trained t(Arch::kCharCnn);
    const auto good = serialize_checkpoint(t.model);
    std::size_t rejected = 0;
    for (std::size_t pos = 0; pos < good.size(); pos += 97) {
      auto bad = good;
      bad[pos] = static_cast<std::uint8_t>(bad[pos] + 1);
      try {
        deserialize_checkpoint(bad);
      } catch (const CheckpointError&) {
        ++rejected;
      }
    }
    CHECK(rejected == (good.size() + 96) / 97);
  }
}
