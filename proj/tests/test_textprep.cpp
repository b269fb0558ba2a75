#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "danes/common.hpp"
#include "danes/textprep.hpp"

#include <filesystem>

using namespace danes;
using namespace danes::textprep;

TEST_CASE("expand_contractions replaces table entries and nothing else") {
    CHECK(expand_contractions("don't go") == "do not go");
    CHECK(expand_contractions("hello world") == "hello world");
    CHECK(expand_contractions("I'll, we're") == "I will, we are");
    // case-insensitive, boundary-aware
    CHECK(expand_contractions("DON'T") == "do not");
    CHECK(expand_contractions("london'ts") == "london'ts");
}

TEST_CASE("normalize_and_tokenize applies the full pipeline") {
    CHECK(normalize_and_tokenize("Cats running!") == std::vector<std::string>{"cat", "run"});
    CHECK(normalize_and_tokenize("") == std::vector<std::string>{});
    CHECK(normalize_and_tokenize("U.S.A.") == std::vector<std::string>{"usa"});
    // contraction feeds the tokenizer
    CHECK(normalize_and_tokenize("can't stop") ==
          std::vector<std::string>{"cannot", "stop"});
    // unicode punctuation (curly quotes, em dash) is stripped
    CHECK(normalize_and_tokenize("“news” — report") ==
          std::vector<std::string>{"news", "report"});
}

TEST_CASE("lemmatizer suffix rules") {
    CHECK(lemmatize("cats") == "cat");
    CHECK(lemmatize("running") == "run");
    CHECK(lemmatize("studies") == "study");
    CHECK(lemmatize("classes") == "class");
    CHECK(lemmatize("boxes") == "box");
    CHECK(lemmatize("making") == "make");
    CHECK(lemmatize("stopped") == "stop");
    CHECK(lemmatize("loved") == "love");
    CHECK(lemmatize("falling") == "fall");
    CHECK(lemmatize("walking") == "walk");
    CHECK(lemmatize("was") == "be");
    CHECK(lemmatize("children") == "child");
    // protected words
    CHECK(lemmatize("news") == "news");
    CHECK(lemmatize("this") == "this");
    CHECK(lemmatize("thing") == "thing");
    CHECK(lemmatize("spring") == "spring");
}

TEST_CASE("build_vocabulary assigns ids in first-occurrence order from 1") {
    const Vocabulary v = build_vocabulary({{"a", "b"}, {"b", "c"}});
    CHECK(v.lemma_to_id.at("a") == 1);
    CHECK(v.lemma_to_id.at("b") == 2);
    CHECK(v.lemma_to_id.at("c") == 3);
    CHECK(v.m_tokens() == 3);
    CHECK(v.rows() == 4); // m = m_tokens + 1 for the padding row

    const Vocabulary single = build_vocabulary({{"x"}});
    CHECK(single.lemma_to_id.at("x") == 1);

    CHECK_THROWS_AS(build_vocabulary({}), DataError);
    CHECK_THROWS_AS(build_vocabulary({{}, {}}), DataError);
}

TEST_CASE("encode_documents left-pads to the corpus maximum") {
    const std::vector<std::vector<std::string>> corpus = {{"e", "g"}, {"a", "b", "c", "h"}};
    const Vocabulary v = build_vocabulary(corpus);
    const TokenMatrix m = encode_documents(corpus, v);
    CHECK(m.n == 2);
    CHECK(m.k == 4);
    CHECK(m.at(0, 0) == 0);
    CHECK(m.at(0, 1) == 0);
    CHECK(m.at(0, 2) == v.lemma_to_id.at("e"));
    CHECK(m.at(0, 3) == v.lemma_to_id.at("g"));
    CHECK(m.doc_lengths[0] == 2);
    CHECK(m.doc_lengths[1] == 4);

    CHECK_THROWS_AS(encode_documents({{"unknown"}}, v), DataError);
}

TEST_CASE("encoded rows have contiguous right-aligned nonzeros") {
    Rng rng(5);
    std::vector<std::vector<std::string>> corpus;
    const std::vector<std::string> pool = {"ka", "lo", "mi", "ne", "po", "ra", "su"};
    for (int d = 0; d < 30; ++d) {
        std::vector<std::string> doc;
        const auto len = rng.uniform_index(9); // lengths 0..8
        for (uint64_t t = 0; t < len; ++t) doc.push_back(pool[rng.uniform_index(pool.size())]);
        corpus.push_back(doc);
    }
    corpus.push_back({"ka"}); // guarantee at least one token
    const Vocabulary v = build_vocabulary(corpus);
    const TokenMatrix m = encode_documents(corpus, v);
    for (int64_t i = 0; i < m.n; ++i) {
        bool seen_nonzero = false;
        int32_t nonzeros = 0;
        for (int64_t j = 0; j < m.k; ++j) {
            if (m.at(i, j) != 0) {
                seen_nonzero = true;
                ++nonzeros;
            } else {
                CHECK(!seen_nonzero); // zeros only before the first token
            }
        }
        CHECK(nonzeros == m.doc_lengths[i]);
    }
}

TEST_CASE("decode(encode(doc)) reproduces the lemma sequence") {
    const std::vector<std::vector<std::string>> corpus = {
        {"one", "two", "three"}, {"two", "one"}, {}};
    const Vocabulary v = build_vocabulary(corpus);
    const TokenMatrix m = encode_documents(corpus, v);
    for (int64_t i = 0; i < m.n; ++i) CHECK(decode_document(m, i, v) == corpus[i]);
}

TEST_CASE("pipeline determinism: same corpus gives bit-identical matrices") {
    const std::vector<std::string> texts = {"Cats don't run!", "We're running fast.",
                                            "U.S.A. news today"};
    std::vector<std::vector<std::string>> c1, c2;
    for (const auto& t : texts) c1.push_back(normalize_and_tokenize(t));
    for (const auto& t : texts) c2.push_back(normalize_and_tokenize(t));
    CHECK(c1 == c2);
    const TokenMatrix m1 = encode_documents(c1, build_vocabulary(c1));
    const TokenMatrix m2 = encode_documents(c2, build_vocabulary(c2));
    CHECK(m1.data == m2.data);
}

TEST_CASE("vocabulary and token matrix round-trip through their files") {
    const std::vector<std::vector<std::string>> corpus = {{"alpha", "beta"}, {"gamma"}};
    const Vocabulary v = build_vocabulary(corpus);
    const TokenMatrix m = encode_documents(corpus, v);

    const auto dir = std::filesystem::temp_directory_path();
    const auto vocab_path = (dir / "tp_vocab.tsv").string();
    const auto matrix_path = (dir / "tp_tokens.csv").string();
    save_vocabulary(v, vocab_path);
    save_token_matrix(m, matrix_path);

    const Vocabulary v2 = load_vocabulary(vocab_path);
    CHECK(v2.lemma_to_id == v.lemma_to_id);
    const TokenMatrix m2 = load_token_matrix(matrix_path);
    CHECK(m2.data == m.data);
    CHECK(m2.doc_lengths == m.doc_lengths);
}
