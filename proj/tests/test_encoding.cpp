#include "doctest.h"

#include "support/scratch.hpp"

#include "hatelab/encoding.hpp"

#include <random>

using namespace hatelab;

TEST_SUITE("encoding") {
  TEST_CASE("build_vocab ordering and cutoff") {
    const std::vector<TokenSeq> corpus{{"a", "b"}, {"a"}};
    const Vocab v = build_vocab(corpus, 1);
    CHECK(v.size() == 4);
    CHECK(v.index_of("a") == 2);
    CHECK(v.index_of("b") == 3);
    CHECK(v.index_of("zzz") == kUnknownIndex);
    const Vocab v2 = build_vocab(corpus, 2);
    CHECK(v2.size() == 3);
    CHECK(v2.index_of("a") == 2);
    CHECK_FALSE(v2.contains("b"));
    CHECK_THROWS(build_vocab({}, 1));
  }

  TEST_CASE("frequency ties break lexicographically") {
    const Vocab v = build_vocab({{"c", "b", "a", "c"}});
    CHECK(v.corpus_tokens() == std::vector<std::string>{"c", "a", "b"});
  }

  TEST_CASE("encode_pad") {
    const Vocab ab(std::vector<std::string>{"a", "b"});
    CHECK(encode_pad({"a", "b"}, ab, 4) == std::vector<std::int32_t>{0, 0, 2, 3});
    const Vocab a(std::vector<std::string>{"a"});
    CHECK(encode_pad({"a", "z"}, a, 2) == std::vector<std::int32_t>{2, 1});
    CHECK(encode_pad({"a", "b", "a"}, ab, 2) == std::vector<std::int32_t>{3, 2});
  }

  TEST_CASE("encode_pad length is always max_len") {
    std::mt19937_64 rng(3);
    const Vocab v(std::vector<std::string>{"x", "y"});
    for (int i = 0; i < 500; ++i) {
      const std::size_t len = rng() % 80, max_len = 1 + rng() % 60;
      TokenSeq t(len, (rng() & 1) ? "x" : "q");
      CHECK(encode_pad(t, v, max_len).size() == max_len);
    }
  }

  TEST_CASE("embedding file parsing") {
    testing::ScratchDir dir("emb");
    const auto good = load_embedding_file(dir.write("good.txt", "a 0.1 0.2\nb 0.3 0.4\n"));
    CHECK(good.dimension() == 2);
    CHECK(*good.find("a") == std::vector<double>{0.1, 0.2});
    CHECK(*good.find("b") == std::vector<double>{0.3, 0.4});
    CHECK(good.find("c") == nullptr);

    try {
      load_embedding_file(dir.write("bad.txt", "a 0.1 0.2\nb 0.3\n"));
      FAIL("expected an error");
    } catch (const EmbeddingFormatError& e) {
      CHECK(e.line() == 2);
    }

    const auto empty = load_embedding_file(dir.write("empty.txt", ""));
    CHECK(empty.vectors.empty());
    CHECK_THROWS(empty.dimension());

    const auto dup = load_embedding_file(dir.write("dup.txt", "a 1 2\na 3 4\n"));
    CHECK(*dup.find("a") == std::vector<double>{1, 2});
  }

  TEST_CASE("bundled toy embeddings") {
    const auto e = load_embedding_file(testing::fixture("toy_embeddings.txt"));
    CHECK(e.vectors.size() == 20);
    CHECK(e.dimension() == 8);
  }

  TEST_CASE("init_embedding_matrix") {
    const Vocab v(std::vector<std::string>{"a"});
    PretrainedEmbeddings pre;
    pre.vectors["a"] = {0.5, 0.5};
    pre.dim = 2;
    const auto m = init_embedding_matrix<double>(v, 2, &pre, 7);
    CHECK(m(2, 0) == 0.5);
    CHECK(m(2, 1) == 0.5);
    CHECK(m.row(0).isZero());

    const auto r1 = init_embedding_matrix<double>(v, 2, nullptr, 7);
    const auto r2 = init_embedding_matrix<double>(v, 2, nullptr, 7);
    CHECK(r1 == r2);
    CHECK(r1.row(2).cwiseAbs().maxCoeff() <= kOovInitRange);
  }

  TEST_CASE("random rows stay in range and pretrained rows are exact") {
    std::vector<std::string> tokens;
    for (int i = 0; i < 200; ++i) tokens.push_back("t" + std::to_string(i));
    const Vocab v(tokens);
    PretrainedEmbeddings pre;
    pre.dim = 3;
    for (int i = 0; i < 200; i += 3) pre.vectors["t" + std::to_string(i)] = {0.9 + i, -7.25, 1e-3};
    const auto m = init_embedding_matrix<float>(v, 3, &pre, 11);
    for (std::int32_t r = 1; r < static_cast<std::int32_t>(v.size()); ++r) {
      const auto* vec = r >= 2 ? pre.find(v.token(r)) : nullptr;
      for (int c = 0; c < 3; ++c) {
        if (vec) CHECK(m(r, c) == static_cast<float>((*vec)[c]));
        else CHECK(std::abs(m(r, c)) <= 0.25f);
      }
    }
  }

  TEST_CASE("encode_chars") {
    const auto ab = encode_chars("ab");
    CHECK(ab.columns[0] == 0);
    CHECK(ab.columns[1] == 1);
    for (std::size_t r = 2; r < CharEncoding::kLength; ++r) CHECK(ab.columns[r] == 26);

    const auto sym = encode_chars("A!");
    CHECK(sym.columns[0] == 0);
    CHECK(sym.columns[1] == 26);

    const auto m = encode_chars(std::string(300, 'z')).to_matrix<double>();
    CHECK(m.rows() == 256);
    CHECK(m.cols() == 27);
    CHECK((m.rowwise().sum().array() == 1.0).all());

    // One catch-all row per multi-byte code point.
    const auto utf = encode_chars("\xc3\xa9x");
    CHECK(utf.columns[0] == 26);
    CHECK(utf.columns[1] == 23);
  }
}
