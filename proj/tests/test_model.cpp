#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "danes/common.hpp"
#include "danes/model.hpp"

#include <cmath>
#include <filesystem>

using namespace danes;
using namespace danes::model;
using tensor::CellType;
using tensor::IntMatrix;
using tensor::Tensor;

namespace {

embed::EmbeddingMatrix tiny_embedding(int64_t m, int64_t s, uint64_t seed) {
    embed::EmbeddingMatrix matrix;
    matrix.m = m;
    matrix.s = s;
    matrix.data.assign(m * s, 0.0);
    Rng rng(seed);
    for (int64_t i = s; i < m * s; ++i) matrix.data[i] = rng.uniform(-0.5, 0.5);
    return matrix;
}

IntMatrix random_ids(int64_t rows, int64_t cols, int64_t m, Rng& rng) {
    IntMatrix ids{rows, cols, {}};
    ids.data.resize(rows * cols);
    for (auto& id : ids.data) id = static_cast<int32_t>(rng.uniform_index(m));
    return ids;
}

Tensor random_social(int64_t rows, int64_t f, Rng& rng) {
    Tensor x({rows, f});
    for (double& v : x.data) v = rng.uniform(-1.5, 1.5);
    return x;
}

ModelConfig small_cfg() {
    ModelConfig cfg;
    cfg.rnn_units = 3;
    cfg.text_kernel = 3;
    cfg.social_kernel = 3;
    cfg.conv_filters = 2;
    cfg.dropout_ff = 0.0;
    cfg.dropout_rec = 0.0;
    cfg.seed = 5;
    return cfg;
}

} // namespace

TEST_CASE("text-only uni GRU flatten width is k*u") {
    const auto W = tiny_embedding(12, 128, 1);
    ModelConfig cfg;
    cfg.social_branch_enabled = false;
    cfg.rnn_units = 128;
    cfg.seed = 1;
    DanesModel m(cfg, &W, 76, 0);
    CHECK(m.text_flat_width() == 76 * 128);
    CHECK(m.embedding_width() == 9728);
}

TEST_CASE("the reference BuzzFace GRU topology builds at full dimensions") {
    const auto W = tiny_embedding(50, 128, 2);
    ModelConfig cfg;
    cfg.cell = CellType::Gru;
    cfg.bidirectional = false;
    cfg.text_cnn = false;
    cfg.social_branch_enabled = true;
    cfg.social_cnn = true;
    cfg.rnn_units = 128;
    cfg.text_kernel = 64;
    cfg.seed = 2;
    DanesModel m(cfg, &W, 76, 8);
    CHECK(m.text_flat_width() == 76 * 128);
    CHECK(m.embedding_width() > m.text_flat_width()); // social branch contributes
    CHECK_FALSE(m.kernel_capped());
}

TEST_CASE("parameter count matches hand-derived closed forms") {
    const int64_t k = 6, s = 5, u = 3;
    const auto W = tiny_embedding(9, s, 3);

    ModelConfig cfg = small_cfg();
    cfg.social_branch_enabled = false;
    cfg.rnn_units = u;

    // uni GRU text-only: 3(s*u + u^2 + u) + (k*u*4 + 4)
    DanesModel gru(cfg, &W, k, 0);
    CHECK(gru.parameter_count() == 3 * (s * u + u * u + u) + (k * u * 4 + 4));

    // uni LSTM text-only: 4(s*u + u^2 + u) + dense
    cfg.cell = CellType::Lstm;
    DanesModel lstm(cfg, &W, k, 0);
    CHECK(lstm.parameter_count() == 4 * (s * u + u * u + u) + (k * u * 4 + 4));

    // adding the social RNN (per-feature scalars, in_dim 1) adds 3(u + u^2 + u)
    cfg.cell = CellType::Gru;
    cfg.social_branch_enabled = true;
    const int64_t f = 4;
    DanesModel with_social(cfg, &W, k, f);
    CHECK(with_social.parameter_count() ==
          3 * (s * u + u * u + u) + 3 * (1 * u + u * u + u) + ((k * u + f * u) * 4 + 4));
}

TEST_CASE("all 24 ablation topologies run forward and backward") {
    const int64_t k = 7, f = 4;
    const auto W = tiny_embedding(10, 5, 4);
    Rng rng(6);
    const IntMatrix ids = random_ids(3, k, 10, rng);
    const Tensor social = random_social(3, f, rng);
    const std::vector<int> labels = {0, 2, 3};

    struct Row {
        bool text_cnn, social_on, social_cnn;
    };
    const Row rows[6] = {{false, false, false}, {true, false, false}, {false, true, false},
                         {false, true, true},   {true, true, false},  {true, true, true}};
    int built = 0;
    for (const CellType cell : {CellType::Gru, CellType::Lstm}) {
        for (const bool bi : {false, true}) {
            for (const Row& row : rows) {
                ModelConfig cfg = small_cfg();
                cfg.cell = cell;
                cfg.bidirectional = bi;
                cfg.text_cnn = row.text_cnn;
                cfg.social_branch_enabled = row.social_on;
                cfg.social_cnn = row.social_cnn;
                DanesModel m(cfg, &W, k, f);
                const Tensor* social_in = row.social_on ? &social : nullptr;
                const double loss = m.compute_loss(ids, social_in, labels, false, nullptr);
                CHECK(std::isfinite(loss));
                m.params().zero_grad();
                m.backward(labels);
                tensor::adam_update(m.params(), tensor::AdamConfig{});
                ++built;
            }
        }
    }
    CHECK(built == 24);
}

TEST_CASE("predict returns distributions and is eval-deterministic") {
    const auto W = tiny_embedding(10, 5, 7);
    ModelConfig cfg = small_cfg();
    cfg.dropout_ff = 0.2; // must not fire in eval mode
    cfg.dropout_rec = 0.2;
    DanesModel m(cfg, &W, 6, 4);
    Rng rng(8);
    const IntMatrix ids = random_ids(2, 6, 10, rng);
    const Tensor social = random_social(2, 4, rng);

    const Tensor p1 = m.predict(ids, &social);
    const Tensor p2 = m.predict(ids, &social);
    CHECK(p1.data == p2.data); // bit-identical
    CHECK(p1.shape == std::vector<int64_t>{2, 4});
    for (int64_t i = 0; i < 2; ++i) {
        double sum = 0.0;
        int argmax = 0;
        for (int64_t j = 0; j < 4; ++j) {
            sum += p1.at2(i, j);
            if (p1.at2(i, j) > p1.at2(i, argmax)) argmax = static_cast<int>(j);
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
        CHECK(argmax >= 0);
        CHECK(argmax <= 3);
    }
}

TEST_CASE("social input presence must match the configuration") {
    const auto W = tiny_embedding(10, 5, 9);
    Rng rng(10);
    const IntMatrix ids = random_ids(2, 6, 10, rng);
    const Tensor social = random_social(2, 4, rng);

    ModelConfig with_social = small_cfg();
    DanesModel m1(with_social, &W, 6, 4);
    CHECK_THROWS_AS(m1.predict(ids, nullptr), DataError);

    ModelConfig without = small_cfg();
    without.social_branch_enabled = false;
    DanesModel m2(without, &W, 6, 0);
    CHECK_THROWS_AS(m2.predict(ids, &social), DataError);
    CHECK(m2.predict(ids, nullptr).shape == std::vector<int64_t>{2, 4});
}

TEST_CASE("network embedding widths add and feed the dense head exactly") {
    const auto W = tiny_embedding(10, 5, 11);
    Rng rng(12);
    const IntMatrix ids = random_ids(2, 6, 10, rng);
    const Tensor social = random_social(2, 4, rng);

    ModelConfig text_only = small_cfg();
    text_only.social_branch_enabled = false;
    DanesModel mt(text_only, &W, 6, 0);

    ModelConfig both = small_cfg();
    DanesModel mb(both, &W, 6, 4);

    ModelConfig social_only_cfg = small_cfg(); // social width via subtraction
    DanesModel ms(social_only_cfg, &W, 6, 4);
    CHECK(mb.embedding_width() ==
          mt.embedding_width() + (ms.embedding_width() - ms.text_flat_width()));

    const Tensor emb = mb.network_embedding(ids, &social);
    CHECK(emb.shape == std::vector<int64_t>{2, mb.embedding_width()});
    const Tensor via_head = mb.dense_head(emb);
    const Tensor direct = mb.predict(ids, &social);
    CHECK(via_head.data == direct.data);
}

TEST_CASE("permuting the batch permutes predictions identically") {
    const auto W = tiny_embedding(10, 5, 13);
    ModelConfig cfg = small_cfg();
    DanesModel m(cfg, &W, 6, 4);
    Rng rng(14);
    const IntMatrix ids = random_ids(4, 6, 10, rng);
    const Tensor social = random_social(4, 4, rng);
    const Tensor probs = m.predict(ids, &social);

    const std::vector<int64_t> perm = {2, 0, 3, 1};
    IntMatrix ids_p{4, 6, std::vector<int32_t>(24)};
    Tensor social_p({4, 4});
    for (int64_t r = 0; r < 4; ++r) {
        for (int64_t j = 0; j < 6; ++j) ids_p.data[r * 6 + j] = ids.at(perm[r], j);
        for (int64_t j = 0; j < 4; ++j) social_p.at2(r, j) = social.at2(perm[r], j);
    }
    const Tensor probs_p = m.predict(ids_p, &social_p);
    for (int64_t r = 0; r < 4; ++r)
        for (int64_t j = 0; j < 4; ++j) CHECK(probs_p.at2(r, j) == probs.at2(perm[r], j));
}

TEST_CASE("oversized kernels are capped and flagged, or rejected when capping is off") {
    const auto W = tiny_embedding(10, 5, 15);
    ModelConfig cfg = small_cfg();
    cfg.text_cnn = true;
    cfg.text_kernel = 128; // longer than k = 6
    DanesModel m(cfg, &W, 6, 4);
    CHECK(m.kernel_capped());

    cfg.cap_kernels = false;
    CHECK_THROWS_AS(DanesModel(cfg, &W, 6, 4), DataError);
}

TEST_CASE("single_step social mode consumes one timestep of f features") {
    const auto W = tiny_embedding(10, 5, 16);
    ModelConfig cfg = small_cfg();
    cfg.social_sequence_mode = SocialSequenceMode::SingleStep;
    DanesModel m(cfg, &W, 6, 4);
    Rng rng(17);
    const IntMatrix ids = random_ids(2, 6, 10, rng);
    const Tensor social = random_social(2, 4, rng);
    const Tensor probs = m.predict(ids, &social);
    CHECK(probs.shape == std::vector<int64_t>{2, 4});
    // social flatten width is u (one timestep), not f*u
    CHECK(m.embedding_width() == m.text_flat_width() + cfg.rnn_units);
}

TEST_CASE("model save/load round-trips predictions") {
    const auto W = tiny_embedding(10, 5, 18);
    ModelConfig cfg = small_cfg();
    cfg.text_cnn = true;
    cfg.social_cnn = true;
    DanesModel m(cfg, &W, 7, 4);
    Rng rng(19);
    const IntMatrix ids = random_ids(3, 7, 10, rng);
    const Tensor social = random_social(3, 4, rng);
    const Tensor before = m.predict(ids, &social);

    const auto path = (std::filesystem::temp_directory_path() / "model_rt.ckpt").string();
    m.save(path);
    const auto loaded = DanesModel::load(path, &W);
    const Tensor after = loaded->predict(ids, &social);
    CHECK(before.data == after.data);
}

TEST_CASE("trainable embedding receives gradients; padding row never does") {
    const auto W = tiny_embedding(10, 5, 20);
    ModelConfig frozen_cfg = small_cfg();
    frozen_cfg.social_branch_enabled = false;
    DanesModel frozen(frozen_cfg, &W, 6, 0);

    ModelConfig tuned_cfg = frozen_cfg;
    tuned_cfg.train_embedding = true;
    DanesModel tuned(tuned_cfg, &W, 6, 0);
    CHECK(tuned.parameter_count() == frozen.parameter_count() + 10 * 5);

    Rng rng(21);
    const IntMatrix ids = random_ids(3, 6, 10, rng);
    const std::vector<int> labels = {0, 1, 2};
    tuned.params().zero_grad();
    tuned.compute_loss(ids, nullptr, labels, false, nullptr);
    tuned.backward(labels);

    tensor::Param* emb = nullptr;
    for (tensor::Param* p : tuned.params().params())
        if (p->name == "embedding.W") emb = p;
    REQUIRE(emb != nullptr);
    // padding row gradient stays zero
    for (int64_t j = 0; j < 5; ++j) CHECK(emb->grad.data[j] == 0.0);
    // at least one looked-up row received gradient
    double total = 0.0;
    for (double g : emb->grad.data) total += std::abs(g);
    CHECK(total > 0.0);
}

TEST_CASE("config json round-trip") {
    ModelConfig cfg = small_cfg();
    cfg.cell = CellType::Lstm;
    cfg.bidirectional = true;
    cfg.text_cnn = true;
    const ModelConfig back = ModelConfig::from_json(cfg.to_json());
    CHECK(back.cell == cfg.cell);
    CHECK(back.bidirectional == cfg.bidirectional);
    CHECK(back.text_cnn == cfg.text_cnn);
    CHECK(back.rnn_units == cfg.rnn_units);
    CHECK(back.seed == cfg.seed);
}
