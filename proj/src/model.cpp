#include "danes/model.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstring>
#include <fstream>

namespace danes::model {

using nlohmann::json;
using tensor::IntMatrix;
using tensor::Tensor;

void ModelConfig::validate() const {
    if (rnn_units < 1) throw DataError("model config: rnn_units must be >= 1");
    if (text_kernel < 1 || social_kernel < 1) throw DataError("model config: kernels must be >= 1");
    if (conv_filters < 1) throw DataError("model config: conv_filters must be >= 1");
    if (pool_width < 1) throw DataError("model config: pool_width must be >= 1");
    if (dropout_ff < 0.0 || dropout_ff >= 1.0 || dropout_rec < 0.0 || dropout_rec >= 1.0)
        throw DataError("model config: dropout rates must be in [0, 1)");
    if (classes < 2) throw DataError("model config: classes must be >= 2");
    if (social_cnn && !social_branch_enabled)
        throw DataError("model config: social_cnn requires the social branch");
}

std::string ModelConfig::to_json() const {
    json doc;
    doc["cell"] = tensor::cell_name(cell);
    doc["bidirectional"] = bidirectional;
    doc["text_cnn"] = text_cnn;
    doc["social_branch_enabled"] = social_branch_enabled;
    doc["social_cnn"] = social_cnn;
    doc["social_sequence_mode"] =
        social_sequence_mode == SocialSequenceMode::PerFeature ? "per_feature" : "single_step";
    doc["rnn_units"] = rnn_units;
    doc["text_kernel"] = text_kernel;
    doc["social_kernel"] = social_kernel;
    doc["conv_filters"] = conv_filters;
    doc["pool_width"] = pool_width;
    doc["dropout_ff"] = dropout_ff;
    doc["dropout_rec"] = dropout_rec;
    doc["classes"] = classes;
    doc["train_embedding"] = train_embedding;
    doc["cap_kernels"] = cap_kernels;
    doc["seed"] = seed;
    return doc.dump(2);
}

ModelConfig ModelConfig::from_json(const std::string& text) {
    json doc = json::parse(text);
    ModelConfig cfg;
    cfg.cell = tensor::parse_cell(doc.value("cell", "gru"));
    cfg.bidirectional = doc.value("bidirectional", false);
    cfg.text_cnn = doc.value("text_cnn", false);
    cfg.social_branch_enabled = doc.value("social_branch_enabled", true);
    cfg.social_cnn = doc.value("social_cnn", false);
    cfg.social_sequence_mode = doc.value("social_sequence_mode", "per_feature") == "single_step"
                                   ? SocialSequenceMode::SingleStep
                                   : SocialSequenceMode::PerFeature;
    cfg.rnn_units = doc.value("rnn_units", int64_t{128});
    cfg.text_kernel = doc.value("text_kernel", int64_t{64});
    cfg.social_kernel = doc.value("social_kernel", int64_t{64});
    cfg.conv_filters = doc.value("conv_filters", int64_t{64});
    cfg.pool_width = doc.value("pool_width", int64_t{2});
    cfg.dropout_ff = doc.value("dropout_ff", 0.2);
    cfg.dropout_rec = doc.value("dropout_rec", 0.2);
    cfg.classes = doc.value("classes", int64_t{4});
    cfg.train_embedding = doc.value("train_embedding", false);
    cfg.cap_kernels = doc.value("cap_kernels", true);
    cfg.seed = doc.value("seed", uint64_t{42});
    return cfg;
}

DanesModel::DanesModel(const ModelConfig& cfg, const embed::EmbeddingMatrix* W,
                       int64_t k, int64_t f)
    : cfg_(cfg), embedding_matrix_(W), k_(k), f_(f),
      embedding_(W, cfg.train_embedding) {
    cfg_.validate();
    if (k < 1) throw DataError("build_model: k must be >= 1");
    if (cfg_.social_branch_enabled && f < 1)
        throw DataError("build_model: social branch requires f >= 1");

    Rng rng(cfg_.seed);
    const int64_t u = cfg_.rnn_units;
    const int64_t rnn_out = cfg_.bidirectional ? 2 * u : u;

    // layer construction order fixes the rng draw order and therefore the
    // initial parameter values: text rnn, text conv, social rnn, social conv,
    // dense head
    text_rnn_ = std::make_unique<tensor::RnnLayer>(cfg_.cell, W->s, u, cfg_.bidirectional,
                                                   cfg_.dropout_ff, cfg_.dropout_rec,
                                                   "text_rnn", rng);
    int64_t text_t = k;
    if (cfg_.text_cnn) {
        text_kernel_eff_ = cfg_.text_kernel;
        if (text_kernel_eff_ > text_t) {
            if (!cfg_.cap_kernels)
                throw DataError("build_model: text kernel " + std::to_string(cfg_.text_kernel) +
                                " exceeds sequence length " + std::to_string(text_t));
            text_kernel_eff_ = text_t;
            kernel_capped_ = true;
        }
        text_conv_ = std::make_unique<tensor::Conv1DMaxPool>(
            rnn_out, cfg_.conv_filters, text_kernel_eff_, cfg_.pool_width, "text_conv", rng);
        text_t = tensor::Conv1DMaxPool::out_time(text_t, text_kernel_eff_, cfg_.pool_width);
        text_width_ = text_t * cfg_.conv_filters;
    } else {
        text_width_ = text_t * rnn_out;
    }

    if (cfg_.social_branch_enabled) {
        const int64_t seq_len =
            cfg_.social_sequence_mode == SocialSequenceMode::PerFeature ? f : 1;
        const int64_t step_dim =
            cfg_.social_sequence_mode == SocialSequenceMode::PerFeature ? 1 : f;
        social_rnn_ = std::make_unique<tensor::RnnLayer>(cfg_.cell, step_dim, u,
                                                         cfg_.bidirectional, cfg_.dropout_ff,
                                                         cfg_.dropout_rec, "social_rnn", rng);
        if (cfg_.social_cnn) {
            const int64_t reshaped_len = seq_len * rnn_out; // b x f x u -> b x (f*u) x 1
            social_kernel_eff_ = std::min<int64_t>(
                std::min(cfg_.social_kernel, cfg_.text_kernel), reshaped_len);
            social_conv_ = std::make_unique<tensor::Conv1DMaxPool>(
                1, cfg_.conv_filters, social_kernel_eff_, cfg_.pool_width, "social_conv", rng);
            const int64_t pooled =
                tensor::Conv1DMaxPool::out_time(reshaped_len, social_kernel_eff_, cfg_.pool_width);
            social_width_ = pooled * cfg_.conv_filters;
        } else {
            social_width_ = seq_len * rnn_out;
        }
    }

    net_width_ = text_width_ + social_width_;
    dense_ = std::make_unique<tensor::DenseSoftmax>(net_width_, cfg_.classes, "dense", rng);

    if (tensor::Param* w = embedding_.weight_param()) store_.add(w);
    text_rnn_->collect(store_);
    if (text_conv_) text_conv_->collect(store_);
    if (social_rnn_) social_rnn_->collect(store_);
    if (social_conv_) social_conv_->collect(store_);
    dense_->collect(store_);
}

Tensor DanesModel::forward(const IntMatrix& ids, const Tensor* social, bool training,
                           Rng* dropout_rng) {
    if (cfg_.social_branch_enabled && social == nullptr)
        throw DataError("predict: social input required but missing");
    if (!cfg_.social_branch_enabled && social != nullptr)
        throw DataError("predict: social input given but the social branch is disabled");
    if (ids.cols != k_)
        throw NumericError("predict: token matrix has " + std::to_string(ids.cols) +
                           " columns, expected " + std::to_string(k_));

    batch_ = ids.rows;
    Tensor emb = embedding_.forward(ids);
    text_rnn_out_ = text_rnn_->forward(emb, training, dropout_rng);
    Tensor text_flat;
    if (text_conv_) {
        Tensor pooled = text_conv_->forward(text_rnn_out_);
        text_flat = tensor::reshape(pooled, {batch_, text_width_});
    } else {
        text_flat = tensor::reshape(text_rnn_out_, {batch_, text_width_});
    }

    if (cfg_.social_branch_enabled) {
        if (social->shape[0] != batch_ || social->shape[1] != f_)
            throw NumericError("predict: social matrix shape mismatch");
        const int64_t seq_len =
            cfg_.social_sequence_mode == SocialSequenceMode::PerFeature ? f_ : 1;
        const int64_t step_dim =
            cfg_.social_sequence_mode == SocialSequenceMode::PerFeature ? 1 : f_;
        Tensor seq = tensor::reshape(*social, {batch_, seq_len, step_dim});
        social_rnn_out_ = social_rnn_->forward(seq, training, dropout_rng);
        Tensor social_flat;
        if (social_conv_) {
            Tensor reshaped =
                tensor::reshape(social_rnn_out_, {batch_, social_rnn_out_.shape[1] *
                                                              social_rnn_out_.shape[2], 1});
            Tensor pooled = social_conv_->forward(reshaped);
            social_flat = tensor::reshape(pooled, {batch_, social_width_});
        } else {
            social_flat = tensor::reshape(social_rnn_out_, {batch_, social_width_});
        }
        net_emb_ = tensor::concat_cols(text_flat, social_flat);
    } else {
        net_emb_ = std::move(text_flat);
    }

    if (net_emb_.shape[1] != net_width_)
        throw NumericError("internal: network embedding width " +
                           std::to_string(net_emb_.shape[1]) + " != expected " +
                           std::to_string(net_width_));
    probs_ = dense_->forward(net_emb_);
    return probs_;
}

double DanesModel::compute_loss(const IntMatrix& ids, const Tensor* social,
                                const std::vector<int>& labels, bool training,
                                Rng* dropout_rng) {
    forward(ids, social, training, dropout_rng);
    return tensor::cross_entropy(probs_, labels);
}

void DanesModel::backward(const std::vector<int>& labels) {
    Tensor dlogits = tensor::cross_entropy_logit_grad(probs_, labels);
    Tensor dnet = dense_->backward_logits(dlogits);

    Tensor dtext({batch_, text_width_});
    Tensor dsocial({batch_, social_width_ > 0 ? social_width_ : 1});
    if (cfg_.social_branch_enabled) {
        tensor::split_cols(dnet, text_width_, dtext, dsocial);
    } else {
        dtext = std::move(dnet);
    }

    Tensor d_text_rnn;
    if (text_conv_) {
        const int64_t pooled_t = text_width_ / cfg_.conv_filters;
        d_text_rnn = text_conv_->backward(
            tensor::reshape(dtext, {batch_, pooled_t, cfg_.conv_filters}));
    } else {
        d_text_rnn = tensor::reshape(dtext, text_rnn_out_.shape);
    }
    Tensor d_emb = text_rnn_->backward(d_text_rnn);
    embedding_.backward(d_emb);

    if (cfg_.social_branch_enabled) {
        Tensor d_social_rnn;
        if (social_conv_) {
            const int64_t pooled_t = social_width_ / cfg_.conv_filters;
            Tensor d_reshaped = social_conv_->backward(
                tensor::reshape(dsocial, {batch_, pooled_t, cfg_.conv_filters}));
            d_social_rnn = tensor::reshape(d_reshaped, social_rnn_out_.shape);
        } else {
            d_social_rnn = tensor::reshape(dsocial, social_rnn_out_.shape);
        }
        social_rnn_->backward(d_social_rnn); // input gradient stops at the data
    }
}

Tensor DanesModel::predict(const IntMatrix& ids, const Tensor* social) {
    return forward(ids, social, /*training=*/false, nullptr);
}

Tensor DanesModel::network_embedding(const IntMatrix& ids, const Tensor* social) {
    forward(ids, social, /*training=*/false, nullptr);
    return net_emb_;
}

Tensor DanesModel::dense_head(const Tensor& embedding) { return dense_->forward(embedding); }

std::vector<std::vector<double>> DanesModel::snapshot_values() const {
    std::vector<std::vector<double>> snapshot;
    snapshot.reserve(store_.params().size());
    for (const tensor::Param* p : store_.params()) snapshot.push_back(p->value.data);
    return snapshot;
}

void DanesModel::restore_values(const std::vector<std::vector<double>>& snapshot) {
    if (snapshot.size() != store_.params().size())
        throw NumericError("restore_values: snapshot size mismatch");
    for (size_t i = 0; i < snapshot.size(); ++i) {
        store_.params()[i]->value.data = snapshot[i];
    }
}

void save_checkpoint(const tensor::ParamStore& store, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    const char magic[4] = {'D', 'N', 'C', 'K'};
    out.write(magic, 4);
    const uint32_t version = 1;
    out.write(reinterpret_cast<const char*>(&version), 4);
    const auto count = static_cast<uint32_t>(store.params().size());
    out.write(reinterpret_cast<const char*>(&count), 4);
    for (const tensor::Param* p : store.params()) {
        const auto name_len = static_cast<uint32_t>(p->name.size());
        out.write(reinterpret_cast<const char*>(&name_len), 4);
        out.write(p->name.data(), name_len);
        const auto ndim = static_cast<uint32_t>(p->value.shape.size());
        out.write(reinterpret_cast<const char*>(&ndim), 4);
        for (int64_t d : p->value.shape) out.write(reinterpret_cast<const char*>(&d), 8);
        out.write(reinterpret_cast<const char*>(p->value.data.data()),
                  static_cast<std::streamsize>(p->value.data.size() * sizeof(double)));
    }
}

void load_checkpoint(tensor::ParamStore& store, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    char magic[4];
    in.read(magic, 4);
    if (std::memcmp(magic, "DNCK", 4) != 0) throw DataError("bad checkpoint magic in " + path);
    uint32_t version = 0, count = 0;
    in.read(reinterpret_cast<char*>(&version), 4);
    if (version != 1) throw DataError("unsupported checkpoint version in " + path);
    in.read(reinterpret_cast<char*>(&count), 4);
    if (count != store.params().size())
        throw DataError("checkpoint parameter count does not match the model");
    for (tensor::Param* p : store.params()) {
        uint32_t name_len = 0;
        in.read(reinterpret_cast<char*>(&name_len), 4);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        if (name != p->name)
            throw DataError("checkpoint tensor \"" + name + "\" does not match expected \"" +
                            p->name + "\"");
        uint32_t ndim = 0;
        in.read(reinterpret_cast<char*>(&ndim), 4);
        std::vector<int64_t> shape(ndim);
        for (auto& d : shape) in.read(reinterpret_cast<char*>(&d), 8);
        if (shape != p->value.shape)
            throw DataError("checkpoint tensor \"" + name + "\" has mismatched shape");
        in.read(reinterpret_cast<char*>(p->value.data.data()),
                static_cast<std::streamsize>(p->value.data.size() * sizeof(double)));
        if (!in) throw DataError("truncated checkpoint: " + path);
    }
}

void DanesModel::save(const std::string& path) const {
    save_checkpoint(store_, path);
    std::ofstream sidecar(path + ".json");
    if (!sidecar) throw DataError("cannot write model sidecar: " + path + ".json");
    json doc = json::parse(cfg_.to_json());
    doc["k"] = k_;
    doc["f"] = f_;
    sidecar << doc.dump(2) << "\n";
}

std::unique_ptr<DanesModel> DanesModel::load(const std::string& path,
                                             const embed::EmbeddingMatrix* W) {
    std::ifstream sidecar(path + ".json");
    if (!sidecar) throw DataError("cannot open model sidecar: " + path + ".json");
    std::string text((std::istreambuf_iterator<char>(sidecar)), std::istreambuf_iterator<char>());
    json doc = json::parse(text);
    ModelConfig cfg = ModelConfig::from_json(text);
    auto model = std::make_unique<DanesModel>(cfg, W, doc.at("k").get<int64_t>(),
                                              doc.at("f").get<int64_t>());
    load_checkpoint(model->store_, path);
    return model;
}

} // namespace danes::model
