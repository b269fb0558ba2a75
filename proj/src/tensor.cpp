#include "danes/tensor.hpp"
#include "danes/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace danes::tensor {

namespace {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// b x T x d slice at timestep t -> b x d
Tensor time_slice(const Tensor& x, int64_t t) {
    const int64_t b = x.shape[0], T = x.shape[1], d = x.shape[2];
    Tensor out({b, d});
    for (int64_t i = 0; i < b; ++i) {
        const double* src = x.data.data() + (i * T + t) * d;
        std::copy(src, src + d, out.data.data() + i * d);
    }
    return out;
}

void set_time_slice(Tensor& x, int64_t t, const Tensor& slice) {
    const int64_t b = x.shape[0], T = x.shape[1], d = x.shape[2];
    for (int64_t i = 0; i < b; ++i) {
        const double* src = slice.data.data() + i * d;
        std::copy(src, src + d, x.data.data() + (i * T + t) * d);
    }
}

Tensor reverse_time(const Tensor& x) {
    const int64_t T = x.shape[1];
    Tensor out(x.shape);
    for (int64_t t = 0; t < T; ++t) set_time_slice(out, t, time_slice(x, T - 1 - t));
    return out;
}

void add_rowwise_bias(Tensor& t, const Tensor& bias) {
    const int64_t cols = bias.numel();
    const int64_t rows = t.numel() / cols;
    for (int64_t i = 0; i < rows; ++i)
        for (int64_t j = 0; j < cols; ++j) t.data[i * cols + j] += bias.data[j];
}

} // namespace

Tensor reshape(const Tensor& t, std::vector<int64_t> shape) {
    if (Tensor::numel_of(shape) != t.numel())
        throw NumericError("reshape: element count mismatch");
    Tensor out;
    out.shape = std::move(shape);
    out.data = t.data;
    return out;
}

void ParamStore::zero_grad() {
    for (Param* p : params_) std::fill(p->grad.data.begin(), p->grad.data.end(), 0.0);
}

int64_t ParamStore::total_count() const {
    int64_t n = 0;
    for (const Param* p : params_) n += p->value.numel();
    return n;
}

void adam_update(ParamStore& store, const AdamConfig& cfg) {
    for (Param* p : store.params()) {
        if (p->grad.numel() != p->value.numel() || p->grad.shape != p->value.shape)
            throw NumericError("adam_update: gradient shape mismatch for " + p->name);
        p->steps += 1;
        const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p->steps));
        const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p->steps));
        for (int64_t i = 0; i < p->value.numel(); ++i) {
            const double g = p->grad.data[i];
            p->moment1.data[i] = cfg.beta1 * p->moment1.data[i] + (1.0 - cfg.beta1) * g;
            p->moment2.data[i] = cfg.beta2 * p->moment2.data[i] + (1.0 - cfg.beta2) * g * g;
            const double mhat = p->moment1.data[i] / bc1;
            const double vhat = p->moment2.data[i] / bc2;
            p->value.data[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

void glorot_init(Tensor& t, int64_t fan_in, int64_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& x : t.data) x = rng.uniform(-limit, limit);
}

// ---- EmbeddingLookup -------------------------------------------------------

EmbeddingLookup::EmbeddingLookup(const embed::EmbeddingMatrix* matrix, bool trainable)
    : matrix_(matrix), trainable_(trainable),
      weights_("embedding.W", {matrix->m, matrix->s}) {
    if (trainable_) weights_.value.data = matrix_->data;
}

Tensor EmbeddingLookup::forward(const IntMatrix& ids) {
    const int64_t m = matrix_->m, s = matrix_->s;
    for (const int32_t id : ids.data) {
        if (id < 0 || id >= m)
            throw NumericError("embedding lookup: id " + std::to_string(id) +
                               " out of range (m = " + std::to_string(m) + ")");
    }
    const double* table = trainable_ ? weights_.value.data.data() : matrix_->data.data();
    Tensor out({ids.rows, ids.cols, s});
#pragma omp parallel for collapse(2) schedule(static)
    for (int64_t i = 0; i < ids.rows; ++i) {
        for (int64_t t = 0; t < ids.cols; ++t) {
            const double* row = table + static_cast<int64_t>(ids.at(i, t)) * s;
            std::copy(row, row + s, out.data.data() + (i * ids.cols + t) * s);
        }
    }
    cached_ids_ = ids;
    return out;
}

void EmbeddingLookup::backward(const Tensor& grad_out) {
    if (!trainable_) return; // frozen matrix: no parameters to update
    const int64_t s = matrix_->s;
    for (int64_t i = 0; i < cached_ids_.rows; ++i) {
        for (int64_t t = 0; t < cached_ids_.cols; ++t) {
            const int32_t id = cached_ids_.at(i, t);
            if (id == 0) continue; // padding row stays zero
            const double* g = grad_out.data.data() + (i * cached_ids_.cols + t) * s;
            double* dst = weights_.grad.data.data() + static_cast<int64_t>(id) * s;
            for (int64_t j = 0; j < s; ++j) dst[j] += g[j];
        }
    }
}

// ---- RnnCell ----------------------------------------------------------------

CellType parse_cell(const std::string& name) {
    if (name == "gru") return CellType::Gru;
    if (name == "lstm") return CellType::Lstm;
    throw DataError("unknown cell type: " + name);
}

std::string cell_name(CellType cell) { return cell == CellType::Gru ? "gru" : "lstm"; }

RnnCell::RnnCell(CellType type, int64_t in_dim, int64_t units, const std::string& name, Rng& rng)
    : wx_(name + ".Wx", {in_dim, (type == CellType::Gru ? 3 : 4) * units}),
      uzr_(name + ".Uzr", type == CellType::Gru ? std::vector<int64_t>{units, 2 * units}
                                                : std::vector<int64_t>{1, 1}),
      uc_(name + ".Uc", type == CellType::Gru ? std::vector<int64_t>{units, units}
                                              : std::vector<int64_t>{units, 4 * units}),
      bias_(name + ".b", {(type == CellType::Gru ? 3 : 4) * units}),
      type_(type), in_dim_(in_dim), units_(units) {
    glorot_init(wx_.value, in_dim, units, rng);
    if (type == CellType::Gru) glorot_init(uzr_.value, units, units, rng);
    glorot_init(uc_.value, units, units, rng);
}

void RnnCell::collect(ParamStore& store) {
    store.add(&wx_);
    if (type_ == CellType::Gru) store.add(&uzr_);
    store.add(&uc_);
    store.add(&bias_);
}

Tensor RnnCell::forward(const Tensor& x, const Tensor& rec_mask) {
    const int64_t b = x.shape[0], T = x.shape[1], u = units_;
    x_ = x;
    rec_mask_ = rec_mask;
    h_prev_.assign(T, Tensor());
    h_rec_.assign(T, Tensor());
    if (type_ == CellType::Gru) {
        z_.assign(T, Tensor());
        r_.assign(T, Tensor());
        hcand_.assign(T, Tensor());
        rh_.assign(T, Tensor());
    } else {
        i_.assign(T, Tensor());
        f_.assign(T, Tensor());
        g_.assign(T, Tensor());
        o_.assign(T, Tensor());
        c_prev_.assign(T, Tensor());
        tanh_c_.assign(T, Tensor());
    }

    Tensor out({b, T, u});
    Tensor h({b, u});
    Tensor c({b, u});
    const bool masked = !rec_mask.data.empty();

    for (int64_t t = 0; t < T; ++t) {
        const Tensor xt = time_slice(x, t);
        Tensor h_rec = h;
        if (masked) {
            for (int64_t i = 0; i < h_rec.numel(); ++i) h_rec.data[i] *= rec_mask.data[i];
        }
        h_prev_[t] = h;
        h_rec_[t] = h_rec;

        if (type_ == CellType::Gru) {
            Tensor pre({b, 3 * u});
            kernels::gemm_nn(xt.data.data(), wx_.value.data.data(), pre.data.data(),
                             b, in_dim_, 3 * u);
            add_rowwise_bias(pre, bias_.value);
            Tensor rec_zr({b, 2 * u});
            kernels::gemm_nn(h_rec.data.data(), uzr_.value.data.data(), rec_zr.data.data(),
                             b, u, 2 * u);

            Tensor z({b, u}), r({b, u});
            for (int64_t i = 0; i < b; ++i) {
                for (int64_t j = 0; j < u; ++j) {
                    z.at2(i, j) = sigmoid(pre.at2(i, j) + rec_zr.at2(i, j));
                    r.at2(i, j) = sigmoid(pre.at2(i, u + j) + rec_zr.at2(i, u + j));
                }
            }
            Tensor rh({b, u});
            for (int64_t i = 0; i < rh.numel(); ++i) rh.data[i] = r.data[i] * h_rec.data[i];
            Tensor rec_c({b, u});
            kernels::gemm_nn(rh.data.data(), uc_.value.data.data(), rec_c.data.data(), b, u, u);
            Tensor hcand({b, u});
            for (int64_t i = 0; i < b; ++i)
                for (int64_t j = 0; j < u; ++j)
                    hcand.at2(i, j) = std::tanh(pre.at2(i, 2 * u + j) + rec_c.at2(i, j));

            Tensor h_new({b, u});
            for (int64_t i = 0; i < h_new.numel(); ++i)
                h_new.data[i] = z.data[i] * h.data[i] + (1.0 - z.data[i]) * hcand.data[i];

            z_[t] = std::move(z);
            r_[t] = std::move(r);
            hcand_[t] = std::move(hcand);
            rh_[t] = std::move(rh);
            h = std::move(h_new);
        } else {
            Tensor pre({b, 4 * u});
            kernels::gemm_nn(xt.data.data(), wx_.value.data.data(), pre.data.data(),
                             b, in_dim_, 4 * u);
            add_rowwise_bias(pre, bias_.value);
            kernels::gemm_nn(h_rec.data.data(), uc_.value.data.data(), pre.data.data(),
                             b, u, 4 * u, /*accumulate=*/true);

            Tensor ig({b, u}), fg({b, u}), gg({b, u}), og({b, u});
            for (int64_t i = 0; i < b; ++i) {
                for (int64_t j = 0; j < u; ++j) {
                    ig.at2(i, j) = sigmoid(pre.at2(i, j));
                    fg.at2(i, j) = sigmoid(pre.at2(i, u + j));
                    gg.at2(i, j) = std::tanh(pre.at2(i, 2 * u + j));
                    og.at2(i, j) = sigmoid(pre.at2(i, 3 * u + j));
                }
            }
            Tensor c_new({b, u}), tanh_c({b, u}), h_new({b, u});
            for (int64_t i = 0; i < c_new.numel(); ++i) {
                c_new.data[i] = fg.data[i] * c.data[i] + ig.data[i] * gg.data[i];
                tanh_c.data[i] = std::tanh(c_new.data[i]);
                h_new.data[i] = og.data[i] * tanh_c.data[i];
            }
            c_prev_[t] = c;
            i_[t] = std::move(ig);
            f_[t] = std::move(fg);
            g_[t] = std::move(gg);
            o_[t] = std::move(og);
            tanh_c_[t] = std::move(tanh_c);
            c = std::move(c_new);
            h = std::move(h_new);
        }
        set_time_slice(out, t, h);
    }
    return out;
}

Tensor RnnCell::backward(const Tensor& grad_out) {
    const int64_t b = x_.shape[0], T = x_.shape[1], u = units_;
    const bool masked = !rec_mask_.data.empty();
    Tensor dx({b, T, in_dim_});
    Tensor dh({b, u});
    Tensor dc({b, u});

    for (int64_t t = T - 1; t >= 0; --t) {
        {
            const Tensor g_t = time_slice(grad_out, t);
            for (int64_t i = 0; i < dh.numel(); ++i) dh.data[i] += g_t.data[i];
        }

        Tensor da; // b x gates*u pre-activation gradients, gate-packed like wx
        Tensor dh_prev({b, u});

        if (type_ == CellType::Gru) {
            const Tensor& z = z_[t];
            const Tensor& r = r_[t];
            const Tensor& hcand = hcand_[t];
            const Tensor& h_prev = h_prev_[t];
            const Tensor& h_rec = h_rec_[t];
            const Tensor& rh = rh_[t];

            Tensor da_c({b, u});
            for (int64_t i = 0; i < u * b; ++i) {
                const double dhc = dh.data[i] * (1.0 - z.data[i]);
                da_c.data[i] = dhc * (1.0 - hcand.data[i] * hcand.data[i]);
                dh_prev.data[i] = dh.data[i] * z.data[i];
            }
            kernels::gemm_tn(rh.data.data(), da_c.data.data(), uc_.grad.data.data(),
                             u, b, u, /*accumulate=*/true);
            Tensor drh({b, u});
            kernels::gemm_nt(da_c.data.data(), uc_.value.data.data(), drh.data.data(), b, u, u);

            Tensor dh_rec({b, u});
            Tensor da_zr({b, 2 * u});
            for (int64_t i = 0; i < b; ++i) {
                for (int64_t j = 0; j < u; ++j) {
                    const int64_t idx = i * u + j;
                    const double dz = dh.data[idx] * (h_prev.data[idx] - hcand.data[idx]);
                    const double dr = drh.data[idx] * h_rec.data[idx];
                    dh_rec.data[idx] = drh.data[idx] * r.data[idx];
                    da_zr.at2(i, j) = dz * z.data[idx] * (1.0 - z.data[idx]);
                    da_zr.at2(i, u + j) = dr * r.data[idx] * (1.0 - r.data[idx]);
                }
            }
            kernels::gemm_tn(h_rec.data.data(), da_zr.data.data(), uzr_.grad.data.data(),
                             u, b, 2 * u, /*accumulate=*/true);
            Tensor dh_from_zr({b, u});
            kernels::gemm_nt(da_zr.data.data(), uzr_.value.data.data(), dh_from_zr.data.data(),
                             b, 2 * u, u);
            for (int64_t i = 0; i < dh_rec.numel(); ++i) dh_rec.data[i] += dh_from_zr.data[i];

            if (masked) {
                for (int64_t i = 0; i < dh_prev.numel(); ++i)
                    dh_prev.data[i] += dh_rec.data[i] * rec_mask_.data[i];
            } else {
                for (int64_t i = 0; i < dh_prev.numel(); ++i) dh_prev.data[i] += dh_rec.data[i];
            }

            da = Tensor({b, 3 * u});
            for (int64_t i = 0; i < b; ++i) {
                for (int64_t j = 0; j < u; ++j) {
                    da.at2(i, j) = da_zr.at2(i, j);
                    da.at2(i, u + j) = da_zr.at2(i, u + j);
                    da.at2(i, 2 * u + j) = da_c.at2(i, j);
                }
            }
        } else {
            const Tensor& ig = i_[t];
            const Tensor& fg = f_[t];
            const Tensor& gg = g_[t];
            const Tensor& og = o_[t];
            const Tensor& c_prev = c_prev_[t];
            const Tensor& tanh_c = tanh_c_[t];
            const Tensor& h_rec = h_rec_[t];

            da = Tensor({b, 4 * u});
            Tensor dc_prev({b, u});
            for (int64_t i = 0; i < b; ++i) {
                for (int64_t j = 0; j < u; ++j) {
                    const int64_t idx = i * u + j;
                    const double d_o = dh.data[idx] * tanh_c.data[idx];
                    const double d_c = dc.data[idx] +
                                       dh.data[idx] * og.data[idx] *
                                           (1.0 - tanh_c.data[idx] * tanh_c.data[idx]);
                    const double d_i = d_c * gg.data[idx];
                    const double d_f = d_c * c_prev.data[idx];
                    const double d_g = d_c * ig.data[idx];
                    dc_prev.data[idx] = d_c * fg.data[idx];
                    da.at2(i, j) = d_i * ig.data[idx] * (1.0 - ig.data[idx]);
                    da.at2(i, u + j) = d_f * fg.data[idx] * (1.0 - fg.data[idx]);
                    da.at2(i, 2 * u + j) = d_g * (1.0 - gg.data[idx] * gg.data[idx]);
                    da.at2(i, 3 * u + j) = d_o * og.data[idx] * (1.0 - og.data[idx]);
                }
            }
            kernels::gemm_tn(h_rec.data.data(), da.data.data(), uc_.grad.data.data(),
                             u, b, 4 * u, /*accumulate=*/true);
            Tensor dh_rec({b, u});
            kernels::gemm_nt(da.data.data(), uc_.value.data.data(), dh_rec.data.data(),
                             b, 4 * u, u);
            if (masked) {
                for (int64_t i = 0; i < dh_prev.numel(); ++i)
                    dh_prev.data[i] = dh_rec.data[i] * rec_mask_.data[i];
            } else {
                dh_prev = dh_rec;
            }
            dc = std::move(dc_prev);
        }

        const Tensor xt = time_slice(x_, t);
        kernels::gemm_tn(xt.data.data(), da.data.data(), wx_.grad.data.data(),
                         in_dim_, b, da.shape[1], /*accumulate=*/true);
        for (int64_t i = 0; i < b; ++i)
            for (int64_t j = 0; j < da.shape[1]; ++j)
                bias_.grad.data[j] += da.at2(i, j);

        Tensor dxt({b, in_dim_});
        kernels::gemm_nt(da.data.data(), wx_.value.data.data(), dxt.data.data(),
                         b, da.shape[1], in_dim_);
        set_time_slice(dx, t, dxt);

        dh = std::move(dh_prev);
    }
    return dx;
}

// ---- RnnLayer ----------------------------------------------------------------

RnnLayer::RnnLayer(CellType type, int64_t in_dim, int64_t units, bool bidirectional,
                   double dropout_ff, double dropout_rec, const std::string& name, Rng& rng)
    : bidirectional_(bidirectional), units_(units),
      dropout_ff_(dropout_ff), dropout_rec_(dropout_rec),
      fw_(type, in_dim, units, name + ".fw", rng),
      bw_(type, in_dim, units, name + ".bw", rng) {}

void RnnLayer::collect(ParamStore& store) {
    fw_.collect(store);
    if (bidirectional_) bw_.collect(store);
}

Tensor RnnLayer::forward(const Tensor& x, bool training, Rng* rng) {
    const int64_t b = x.shape[0], d = x.shape[2];
    Tensor xm = x;
    ff_mask_ = Tensor();
    Tensor rec_fw, rec_bw;
    if (training && dropout_ff_ > 0.0) {
        ff_mask_ = dropout_mask(b, d, dropout_ff_, *rng);
        for (int64_t i = 0; i < b; ++i)
            for (int64_t t = 0; t < x.shape[1]; ++t)
                for (int64_t j = 0; j < d; ++j)
                    xm.at3(i, t, j) *= ff_mask_.at2(i, j);
    }
    if (training && dropout_rec_ > 0.0) {
        rec_fw = dropout_mask(b, units_, dropout_rec_, *rng);
        if (bidirectional_) rec_bw = dropout_mask(b, units_, dropout_rec_, *rng);
    }

    Tensor hf = fw_.forward(xm, rec_fw);
    if (!bidirectional_) return hf;

    Tensor hb = reverse_time(bw_.forward(reverse_time(xm), rec_bw));
    return concat_cols(hf, hb);
}

Tensor RnnLayer::backward(const Tensor& grad_out) {
    Tensor dxm;
    if (!bidirectional_) {
        dxm = fw_.backward(grad_out);
    } else {
        const int64_t b = grad_out.shape[0], T = grad_out.shape[1];
        Tensor gf({b, T, units_}), gb({b, T, units_});
        split_cols(grad_out, units_, gf, gb);
        dxm = fw_.backward(gf);
        Tensor dxb = reverse_time(bw_.backward(reverse_time(gb)));
        for (int64_t i = 0; i < dxm.numel(); ++i) dxm.data[i] += dxb.data[i];
    }
    if (!ff_mask_.data.empty()) {
        const int64_t b = dxm.shape[0], T = dxm.shape[1], d = dxm.shape[2];
        for (int64_t i = 0; i < b; ++i)
            for (int64_t t = 0; t < T; ++t)
                for (int64_t j = 0; j < d; ++j)
                    dxm.at3(i, t, j) *= ff_mask_.at2(i, j);
    }
    return dxm;
}

// ---- Conv1DMaxPool -------------------------------------------------------------

Conv1DMaxPool::Conv1DMaxPool(int64_t in_channels, int64_t filters, int64_t kernel, int64_t pool,
                             const std::string& name, Rng& rng)
    : weights_(name + ".W", {filters, kernel, in_channels}),
      bias_(name + ".b", {filters}),
      in_channels_(in_channels), filters_(filters), kernel_(kernel), pool_(pool) {
    glorot_init(weights_.value, kernel * in_channels, filters, rng);
}

void Conv1DMaxPool::collect(ParamStore& store) {
    store.add(&weights_);
    store.add(&bias_);
}

int64_t Conv1DMaxPool::out_time(int64_t t, int64_t kernel, int64_t pool) {
    const int64_t conv_t = t - kernel + 1;
    return (conv_t + pool - 1) / pool;
}

Tensor Conv1DMaxPool::forward(const Tensor& x) {
    const int64_t b = x.shape[0], T = x.shape[1];
    if (kernel_ > T)
        throw NumericError("conv1d: kernel " + std::to_string(kernel_) +
                           " exceeds sequence length " + std::to_string(T));
    x_ = x;
    const int64_t conv_t = T - kernel_ + 1;
    preact_ = Tensor({b, conv_t, filters_});
    kernels::conv1d_forward(x.data.data(), weights_.value.data.data(), bias_.value.data.data(),
                            preact_.data.data(), b, T, in_channels_, filters_, kernel_);

    const int64_t pooled_t = out_time(T, kernel_, pool_);
    Tensor out({b, pooled_t, filters_});
    argmax_.assign(b * pooled_t * filters_, 0);
    for (int64_t n = 0; n < b; ++n) {
        for (int64_t p = 0; p < pooled_t; ++p) {
            const int64_t lo = p * pool_;
            const int64_t hi = std::min(lo + pool_, conv_t);
            for (int64_t f = 0; f < filters_; ++f) {
                double best = -1.0; // ReLU output is never negative
                int64_t best_t = lo;
                for (int64_t t = lo; t < hi; ++t) {
                    const double v = std::max(0.0, preact_.at3(n, t, f));
                    if (v > best) { // strict: ties keep the earliest index
                        best = v;
                        best_t = t;
                    }
                }
                out.at3(n, p, f) = best;
                argmax_[(n * pooled_t + p) * filters_ + f] = best_t;
            }
        }
    }
    return out;
}

Tensor Conv1DMaxPool::backward(const Tensor& grad_out) {
    const int64_t b = x_.shape[0], T = x_.shape[1];
    const int64_t conv_t = T - kernel_ + 1;
    const int64_t pooled_t = grad_out.shape[1];

    Tensor dz({b, conv_t, filters_});
    for (int64_t n = 0; n < b; ++n) {
        for (int64_t p = 0; p < pooled_t; ++p) {
            for (int64_t f = 0; f < filters_; ++f) {
                const int64_t t = argmax_[(n * pooled_t + p) * filters_ + f];
                if (preact_.at3(n, t, f) > 0.0) dz.at3(n, t, f) += grad_out.at3(n, p, f);
            }
        }
    }

#pragma omp parallel for schedule(static)
    for (int64_t f = 0; f < filters_; ++f) {
        double db = 0.0;
        for (int64_t n = 0; n < b; ++n) {
            for (int64_t t = 0; t < conv_t; ++t) {
                const double g = dz.at3(n, t, f);
                if (g == 0.0) continue;
                db += g;
                for (int64_t k = 0; k < kernel_; ++k) {
                    const double* xr = x_.data.data() + ((n * T + t + k) * in_channels_);
                    double* wr = weights_.grad.data.data() + ((f * kernel_ + k) * in_channels_);
                    for (int64_t c = 0; c < in_channels_; ++c) wr[c] += g * xr[c];
                }
            }
        }
        bias_.grad.data[f] += db;
    }

    Tensor dx({b, T, in_channels_});
#pragma omp parallel for schedule(static)
    for (int64_t n = 0; n < b; ++n) {
        for (int64_t t = 0; t < conv_t; ++t) {
            for (int64_t f = 0; f < filters_; ++f) {
                const double g = dz.at3(n, t, f);
                if (g == 0.0) continue;
                for (int64_t k = 0; k < kernel_; ++k) {
                    const double* wr = weights_.value.data.data() + ((f * kernel_ + k) * in_channels_);
                    double* xr = dx.data.data() + ((n * T + t + k) * in_channels_);
                    for (int64_t c = 0; c < in_channels_; ++c) xr[c] += g * wr[c];
                }
            }
        }
    }
    return dx;
}

// ---- DenseSoftmax ---------------------------------------------------------------

DenseSoftmax::DenseSoftmax(int64_t in_dim, int64_t classes, const std::string& name, Rng& rng)
    : weights_(name + ".W", {in_dim, classes}),
      bias_(name + ".b", {classes}),
      in_dim_(in_dim), classes_(classes) {
    glorot_init(weights_.value, in_dim, classes, rng);
}

void DenseSoftmax::collect(ParamStore& store) {
    store.add(&weights_);
    store.add(&bias_);
}

Tensor DenseSoftmax::forward(const Tensor& x) {
    const int64_t b = x.shape[0];
    x_ = x;
    Tensor probs({b, classes_});
    kernels::gemm_nn(x.data.data(), weights_.value.data.data(), probs.data.data(),
                     b, in_dim_, classes_);
    add_rowwise_bias(probs, bias_.value);
    for (int64_t i = 0; i < b; ++i) {
        double max_logit = probs.at2(i, 0);
        for (int64_t j = 1; j < classes_; ++j) max_logit = std::max(max_logit, probs.at2(i, j));
        double sum = 0.0;
        for (int64_t j = 0; j < classes_; ++j) {
            const double e = std::exp(probs.at2(i, j) - max_logit);
            probs.at2(i, j) = e;
            sum += e;
        }
        for (int64_t j = 0; j < classes_; ++j) probs.at2(i, j) /= sum;
    }
    return probs;
}

Tensor DenseSoftmax::backward_logits(const Tensor& grad_logits) {
    const int64_t b = grad_logits.shape[0];
    kernels::gemm_tn(x_.data.data(), grad_logits.data.data(), weights_.grad.data.data(),
                     in_dim_, b, classes_, /*accumulate=*/true);
    for (int64_t i = 0; i < b; ++i)
        for (int64_t j = 0; j < classes_; ++j) bias_.grad.data[j] += grad_logits.at2(i, j);
    Tensor dx({b, in_dim_});
    kernels::gemm_nt(grad_logits.data.data(), weights_.value.data.data(), dx.data.data(),
                     b, classes_, in_dim_);
    return dx;
}

// ---- Dropout ------------------------------------------------------------------

Tensor dropout_mask(int64_t rows, int64_t cols, double rate, Rng& rng) {
    Tensor mask({rows, cols});
    const double keep_scale = 1.0 / (1.0 - rate);
    for (double& v : mask.data) v = rng.uniform() < rate ? 0.0 : keep_scale;
    return mask;
}

Tensor Dropout::forward(const Tensor& x, bool training, Rng* rng) {
    active_ = training && rate_ > 0.0;
    if (!active_) return x;
    mask_ = Tensor(x.shape);
    const double keep_scale = 1.0 / (1.0 - rate_);
    for (double& v : mask_.data) v = rng->uniform() < rate_ ? 0.0 : keep_scale;
    Tensor out(x.shape);
    for (int64_t i = 0; i < x.numel(); ++i) out.data[i] = x.data[i] * mask_.data[i];
    return out;
}

Tensor Dropout::backward(const Tensor& grad_out) const {
    if (!active_) return grad_out;
    Tensor dx(grad_out.shape);
    for (int64_t i = 0; i < grad_out.numel(); ++i) dx.data[i] = grad_out.data[i] * mask_.data[i];
    return dx;
}

// ---- losses and helpers ----------------------------------------------------------

double cross_entropy(const Tensor& probs, const std::vector<int>& labels) {
    const int64_t b = probs.shape[0], classes = probs.shape[1];
    if (static_cast<int64_t>(labels.size()) != b)
        throw NumericError("cross_entropy: label count does not match batch");
    double loss = 0.0;
    for (int64_t i = 0; i < b; ++i) {
        if (labels[i] < 0 || labels[i] >= classes)
            throw DataError("cross_entropy: label " + std::to_string(labels[i]) +
                            " out of range for " + std::to_string(classes) + " classes");
        loss += -std::log(std::max(probs.at2(i, labels[i]), 1e-12));
    }
    return loss / static_cast<double>(b);
}

Tensor cross_entropy_logit_grad(const Tensor& probs, const std::vector<int>& labels) {
    const int64_t b = probs.shape[0], classes = probs.shape[1];
    Tensor grad({b, classes});
    const double inv_b = 1.0 / static_cast<double>(b);
    for (int64_t i = 0; i < b; ++i) {
        for (int64_t j = 0; j < classes; ++j) {
            grad.at2(i, j) = (probs.at2(i, j) - (labels[i] == j ? 1.0 : 0.0)) * inv_b;
        }
    }
    return grad;
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    const int64_t ca = a.shape.back(), cb = b.shape.back();
    const int64_t rows = a.numel() / ca;
    std::vector<int64_t> shape(a.shape.begin(), a.shape.end() - 1);
    shape.push_back(ca + cb);
    Tensor out(std::move(shape));
    for (int64_t i = 0; i < rows; ++i) {
        std::copy(a.data.begin() + i * ca, a.data.begin() + (i + 1) * ca,
                  out.data.begin() + i * (ca + cb));
        std::copy(b.data.begin() + i * cb, b.data.begin() + (i + 1) * cb,
                  out.data.begin() + i * (ca + cb) + ca);
    }
    return out;
}

void split_cols(const Tensor& grad, int64_t left_cols, Tensor& grad_a, Tensor& grad_b) {
    const int64_t cols = grad.shape.back();
    const int64_t rows = grad.numel() / cols;
    const int64_t right_cols = cols - left_cols;
    for (int64_t i = 0; i < rows; ++i) {
        std::copy(grad.data.begin() + i * cols, grad.data.begin() + i * cols + left_cols,
                  grad_a.data.begin() + i * left_cols);
        std::copy(grad.data.begin() + i * cols + left_cols, grad.data.begin() + (i + 1) * cols,
                  grad_b.data.begin() + i * right_cols);
    }
}

GradCheckResult grad_check(const std::function<double()>& loss_fn,
                           const std::function<void()>& backward_fn,
                           const std::vector<Param*>& params, double eps, int64_t coords,
                           uint64_t seed) {
    loss_fn(); // prime the caches for the analytic pass
    for (Param* p : params) std::fill(p->grad.data.begin(), p->grad.data.end(), 0.0);
    backward_fn();

    int64_t total = 0;
    for (const Param* p : params) total += p->value.numel();

    Rng rng(seed);
    GradCheckResult result;
    for (int64_t c = 0; c < coords; ++c) {
        int64_t flat = static_cast<int64_t>(rng.uniform_index(static_cast<uint64_t>(total)));
        Param* target = nullptr;
        for (Param* p : params) {
            if (flat < p->value.numel()) { target = p; break; }
            flat -= p->value.numel();
        }
        double& theta = target->value.data[flat];
        const double saved = theta;
        theta = saved + eps;
        const double loss_plus = loss_fn();
        theta = saved - eps;
        const double loss_minus = loss_fn();
        theta = saved;

        const double numeric = (loss_plus - loss_minus) / (2.0 * eps);
        const double analytic = target->grad.data[flat];
        const double rel = std::abs(analytic - numeric) /
                           std::max(std::abs(analytic) + std::abs(numeric), 1e-5);
        result.max_rel_err = std::max(result.max_rel_err, rel);
        ++result.coords_checked;
    }
    return result;
}

} // namespace danes::tensor
