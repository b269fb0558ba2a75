#pragma once

#include "danes/embed.hpp"
#include "danes/tensor.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace danes::model {

// How the social branch turns the f standardized features into a sequence:
// PerFeature feeds them as a length-f sequence of scalars (default);
// SingleStep feeds one timestep carrying all f features.
enum class SocialSequenceMode { PerFeature, SingleStep };

struct ModelConfig {
    tensor::CellType cell = tensor::CellType::Gru;
    bool bidirectional = false;
    bool text_cnn = false;
    bool social_branch_enabled = true;
    bool social_cnn = false;
    SocialSequenceMode social_sequence_mode = SocialSequenceMode::PerFeature;
    int64_t rnn_units = 128;
    int64_t text_kernel = 64;   // dataset-dependent
    int64_t social_kernel = 64; // capped to the social conv input length at build
    int64_t conv_filters = 64;
    int64_t pool_width = 2;
    double dropout_ff = 0.2;
    double dropout_rec = 0.2;
    int64_t classes = 4;
    bool train_embedding = false; // embedding matrix frozen by default
    bool cap_kernels = true;      // clamp kernels to the sequence length instead of erroring
    uint64_t seed = 42;

    void validate() const;
    std::string to_json() const;
    static ModelConfig from_json(const std::string& text);
};

// Two-branch ensemble: Embedding -> [Bi]RNN [-> Conv+MaxPool] -> Flatten on
// the text side, [Bi]RNN [-> Reshape -> Conv+MaxPool] -> Flatten on the
// social side, concatenated into the network embedding and classified by a
// dense softmax head.
class DanesModel {
public:
    DanesModel(const ModelConfig& cfg, const embed::EmbeddingMatrix* W, int64_t k, int64_t f);

    // forward + cross-entropy; caches activations for backward()
    double compute_loss(const tensor::IntMatrix& ids, const tensor::Tensor* social,
                        const std::vector<int>& labels, bool training, Rng* dropout_rng);
    void backward(const std::vector<int>& labels);

    // eval mode, no dropout; rows are probability distributions
    tensor::Tensor predict(const tensor::IntMatrix& ids, const tensor::Tensor* social);
    // the pre-dense concatenated tensor
    tensor::Tensor network_embedding(const tensor::IntMatrix& ids, const tensor::Tensor* social);
    // classification head alone, for graph-decomposition checks
    tensor::Tensor dense_head(const tensor::Tensor& embedding);

    tensor::ParamStore& params() { return store_; }
    int64_t parameter_count() const { return store_.total_count(); }
    int64_t embedding_width() const { return net_width_; }
    int64_t text_flat_width() const { return text_width_; }
    bool kernel_capped() const { return kernel_capped_; }
    const ModelConfig& config() const { return cfg_; }
    int64_t k() const { return k_; }
    int64_t f() const { return f_; }

    void save(const std::string& path) const; // checkpoint + .json config sidecar
    static std::unique_ptr<DanesModel> load(const std::string& path,
                                            const embed::EmbeddingMatrix* W);

    // raw parameter snapshot, used by early stopping to restore the best epoch
    std::vector<std::vector<double>> snapshot_values() const;
    void restore_values(const std::vector<std::vector<double>>& snapshot);

private:
    tensor::Tensor forward(const tensor::IntMatrix& ids, const tensor::Tensor* social,
                           bool training, Rng* dropout_rng);

    ModelConfig cfg_;
    const embed::EmbeddingMatrix* embedding_matrix_;
    int64_t k_ = 0, f_ = 0;
    int64_t text_width_ = 0, social_width_ = 0, net_width_ = 0;
    int64_t text_kernel_eff_ = 0, social_kernel_eff_ = 0;
    bool kernel_capped_ = false;

    tensor::EmbeddingLookup embedding_;
    std::unique_ptr<tensor::RnnLayer> text_rnn_;
    std::unique_ptr<tensor::Conv1DMaxPool> text_conv_;
    std::unique_ptr<tensor::RnnLayer> social_rnn_;
    std::unique_ptr<tensor::Conv1DMaxPool> social_conv_;
    std::unique_ptr<tensor::DenseSoftmax> dense_;
    tensor::ParamStore store_;

    // forward caches
    tensor::Tensor text_rnn_out_, social_rnn_out_, net_emb_, probs_;
    int64_t batch_ = 0;
};

// Writes every named parameter with a shape header and 64-bit little-endian
// values; format documented in README.md.
void save_checkpoint(const tensor::ParamStore& store, const std::string& path);
void load_checkpoint(tensor::ParamStore& store, const std::string& path);

} // namespace danes::model
