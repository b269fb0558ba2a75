#pragma once

#include "danes/common.hpp"
#include "danes/embed.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace danes::tensor {

struct Tensor {
    std::vector<int64_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<int64_t> dims)
        : shape(std::move(dims)), data(numel_of(shape), 0.0) {}

    static int64_t numel_of(const std::vector<int64_t>& dims) {
        int64_t n = 1;
        for (int64_t d : dims) n *= d;
        return n;
    }
    int64_t numel() const { return static_cast<int64_t>(data.size()); }
    int64_t dim(size_t i) const { return shape[i]; }

    double& at2(int64_t i, int64_t j) { return data[i * shape[1] + j]; }
    double at2(int64_t i, int64_t j) const { return data[i * shape[1] + j]; }
    double& at3(int64_t i, int64_t j, int64_t k) {
        return data[(i * shape[1] + j) * shape[2] + k];
    }
    double at3(int64_t i, int64_t j, int64_t k) const {
        return data[(i * shape[1] + j) * shape[2] + k];
    }
};

// Same buffer, new shape (row-major layouts are compatible).
Tensor reshape(const Tensor& t, std::vector<int64_t> shape);

struct IntMatrix {
    int64_t rows = 0, cols = 0;
    std::vector<int32_t> data;
    int32_t at(int64_t i, int64_t j) const { return data[i * cols + j]; }
};

// One named parameter with its gradient and optimizer state.
struct Param {
    std::string name;
    Tensor value;
    Tensor grad;
    Tensor moment1, moment2; // Adam accumulators
    int64_t steps = 0;

    explicit Param(std::string n, std::vector<int64_t> dims)
        : name(std::move(n)), value(dims), grad(dims), moment1(dims), moment2(std::move(dims)) {}
};

// Registry of the parameters owned by a model's layers, in insertion order.
class ParamStore {
public:
    void add(Param* p) { params_.push_back(p); }
    std::vector<Param*>& params() { return params_; }
    const std::vector<Param*>& params() const { return params_; }
    void zero_grad();
    int64_t total_count() const;

private:
    std::vector<Param*> params_;
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-7;
};

// Bias-corrected moment update over every parameter's .grad; increments steps.
void adam_update(ParamStore& store, const AdamConfig& cfg);

void glorot_init(Tensor& t, int64_t fan_in, int64_t fan_out, Rng& rng);

// ---- layers ------------------------------------------------------------

// Token-id lookup into the (normally frozen) embedding matrix.
class EmbeddingLookup {
public:
    EmbeddingLookup(const embed::EmbeddingMatrix* matrix, bool trainable);

    Tensor forward(const IntMatrix& ids); // b x k x s
    void backward(const Tensor& grad_out);

    Param* weight_param() { return trainable_ ? &weights_ : nullptr; }
    int64_t dim() const { return matrix_->s; }

private:
    const embed::EmbeddingMatrix* matrix_;
    bool trainable_;
    Param weights_; // copy of the matrix, used only when trainable
    IntMatrix cached_ids_;
};

enum class CellType { Gru, Lstm };

CellType parse_cell(const std::string& name);
std::string cell_name(CellType cell);

// One direction of a recurrent layer.
class RnnCell {
public:
    RnnCell(CellType type, int64_t in_dim, int64_t units, const std::string& name, Rng& rng);

    // x: b x T x in_dim (already feed-forward-masked by the wrapper).
    // rec_mask: b x units inverted-dropout mask, or empty for eval.
    Tensor forward(const Tensor& x, const Tensor& rec_mask);
    // grad_out: b x T x units; returns grad w.r.t. the masked input.
    Tensor backward(const Tensor& grad_out);

    void collect(ParamStore& store);
    int64_t units() const { return units_; }
    CellType type() const { return type_; }

    Param wx_;  // in_dim x gates*units
    Param uzr_; // GRU: units x 2*units (update/reset recurrences)
    Param uc_;  // GRU: units x units (candidate recurrence); LSTM: units x 4*units
    Param bias_;

private:
    CellType type_;
    int64_t in_dim_, units_;
    // per-timestep caches for backpropagation through time
    Tensor x_, rec_mask_;
    std::vector<Tensor> h_prev_, h_rec_, z_, r_, hcand_, rh_;          // GRU
    std::vector<Tensor> i_, f_, g_, o_, c_prev_, tanh_c_;              // LSTM
};

// [Bi]RNN wrapper: returns the full hidden-state sequence; bidirectional
// concatenates the forward and backward passes along the feature axis.
// Dropout masks (feed-forward on the input, recurrent on the hidden state)
// are sampled once per sequence and reused across timesteps.
class RnnLayer {
public:
    RnnLayer(CellType type, int64_t in_dim, int64_t units, bool bidirectional,
             double dropout_ff, double dropout_rec, const std::string& name, Rng& rng);

    Tensor forward(const Tensor& x, bool training, Rng* rng); // b x T x (u or 2u)
    Tensor backward(const Tensor& grad_out);

    void collect(ParamStore& store);
    int64_t out_dim() const { return bidirectional_ ? 2 * units_ : units_; }
    RnnCell& forward_cell() { return fw_; }
    RnnCell& backward_cell() { return bw_; }
    bool bidirectional() const { return bidirectional_; }

private:
    bool bidirectional_;
    int64_t units_;
    double dropout_ff_, dropout_rec_;
    RnnCell fw_, bw_; // bw_ parameters unused when unidirectional
    Tensor ff_mask_;  // empty in eval mode
};

// Valid 1-D convolution + ReLU + non-overlapping max pooling (final partial
// window kept). Pool ties route the gradient to the earliest index.
class Conv1DMaxPool {
public:
    Conv1DMaxPool(int64_t in_channels, int64_t filters, int64_t kernel, int64_t pool,
                  const std::string& name, Rng& rng);

    Tensor forward(const Tensor& x); // b x ceil((T-K+1)/P) x F
    Tensor backward(const Tensor& grad_out);

    void collect(ParamStore& store);
    static int64_t out_time(int64_t t, int64_t kernel, int64_t pool);

    Param weights_; // F x K x C
    Param bias_;    // F

private:
    int64_t in_channels_, filters_, kernel_, pool_;
    Tensor x_, preact_;
    std::vector<int64_t> argmax_;
};

// Dense layer with softmax output (max-subtracted for stability).
class DenseSoftmax {
public:
    DenseSoftmax(int64_t in_dim, int64_t classes, const std::string& name, Rng& rng);

    Tensor forward(const Tensor& x); // b x C, rows sum to 1
    // Takes the gradient w.r.t. the logits (softmax+cross-entropy fuse to
    // probs - onehot); returns grad w.r.t. the input.
    Tensor backward_logits(const Tensor& grad_logits);

    void collect(ParamStore& store);
    int64_t classes() const { return classes_; }

    Param weights_; // in_dim x C
    Param bias_;    // C

private:
    int64_t in_dim_, classes_;
    Tensor x_;
};

// Inverted dropout: scales by 1/(1-rate) at train time, identity at eval.
class Dropout {
public:
    explicit Dropout(double rate) : rate_(rate) {}
    Tensor forward(const Tensor& x, bool training, Rng* rng);
    Tensor backward(const Tensor& grad_out) const;

private:
    double rate_;
    Tensor mask_;
    bool active_ = false;
};

// Samples a b x dim inverted-dropout mask (values 0 or 1/(1-rate)).
Tensor dropout_mask(int64_t rows, int64_t cols, double rate, Rng& rng);

// ---- losses and checks ---------------------------------------------------

// Mean over the batch of -log(probs[i, labels[i]]), probabilities clamped to
// >= 1e-12 before the log.
double cross_entropy(const Tensor& probs, const std::vector<int>& labels);

// dL/dlogits for softmax + mean cross-entropy: (probs - onehot) / batch.
Tensor cross_entropy_logit_grad(const Tensor& probs, const std::vector<int>& labels);

Tensor concat_cols(const Tensor& a, const Tensor& b);
void split_cols(const Tensor& grad, int64_t left_cols, Tensor& grad_a, Tensor& grad_b);

struct GradCheckResult {
    double max_rel_err = 0.0;
    int64_t coords_checked = 0;
};

// Central finite differences on a random coordinate subset of the given
// parameters. loss_fn must rerun the forward pass; backward_fn must populate
// every parameter's .grad once. Relative error per coordinate is
// |analytic - numeric| / max(|analytic| + |numeric|, 1e-5).
GradCheckResult grad_check(const std::function<double()>& loss_fn,
                           const std::function<void()>& backward_fn,
                           const std::vector<Param*>& params, double eps, int64_t coords,
                           uint64_t seed);

} // namespace danes::tensor
