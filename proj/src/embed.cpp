#include "danes/embed.hpp"
#include "danes/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace danes::embed {

using textprep::Vocabulary;

void EmbedConfig::validate() const {
    if (window < 1) throw DataError("embed config: window must be >= 1");
    if (dim < 1) throw DataError("embed config: dim must be >= 1");
    if (epochs < 1) throw DataError("embed config: epochs must be >= 1");
    if (learning_rate <= 0.0) throw DataError("embed config: learning rate must be > 0");
    if (negatives < 1) throw DataError("embed config: negatives must be >= 1");
    if (min_ngram > max_ngram) throw DataError("embed config: min_ngram > max_ngram");
    if (mittens_mu < 0.0) throw DataError("embed config: mittens_mu must be >= 0");
}

EmbedModel parse_model(const std::string& name) {
    if (name == "w2v-cbow") return EmbedModel::Word2VecCbow;
    if (name == "w2v-sg") return EmbedModel::Word2VecSkipGram;
    if (name == "ft-cbow") return EmbedModel::FastTextCbow;
    if (name == "ft-sg") return EmbedModel::FastTextSkipGram;
    if (name == "glove") return EmbedModel::Glove;
    if (name == "mittens") return EmbedModel::Mittens;
    throw DataError("unknown embedding model: " + name);
}

std::string model_name(EmbedModel model) {
    switch (model) {
    case EmbedModel::Word2VecCbow: return "w2v-cbow";
    case EmbedModel::Word2VecSkipGram: return "w2v-sg";
    case EmbedModel::FastTextCbow: return "ft-cbow";
    case EmbedModel::FastTextSkipGram: return "ft-sg";
    case EmbedModel::Glove: return "glove";
    case EmbedModel::Mittens: return "mittens";
    }
    return "?";
}

TokenStreams token_streams(const textprep::TokenMatrix& matrix) {
    TokenStreams docs;
    docs.reserve(matrix.n);
    for (int64_t i = 0; i < matrix.n; ++i) docs.push_back(matrix.tokens(i));
    return docs;
}

double CooccurrenceTable::weight(int32_t center, int32_t context) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), std::pair{center, context},
                               [](const CoocEntry& e, const std::pair<int32_t, int32_t>& key) {
                                   return std::pair{e.center, e.context} < key;
                               });
    if (it != entries.end() && it->center == center && it->context == context) return it->weight;
    return 0.0;
}

namespace {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// -log sigmoid(x), computed as softplus(-x)
double neg_log_sigmoid(double x) {
    if (x > 0.0) return std::log1p(std::exp(-x));
    return -x + std::log1p(std::exp(x));
}

// Id sampler over the unigram distribution raised to 3/4.
class NoiseTable {
public:
    NoiseTable(const TokenStreams& docs, int m_tokens) {
        std::vector<double> counts(static_cast<size_t>(m_tokens) + 1, 0.0);
        for (const auto& doc : docs)
            for (int32_t id : doc) counts[id] += 1.0;
        cumulative_.resize(counts.size(), 0.0);
        double total = 0.0;
        for (size_t id = 1; id < counts.size(); ++id) {
            total += std::pow(counts[id], 0.75);
            cumulative_[id] = total;
        }
        total_ = total;
    }

    int32_t sample(Rng& rng) const {
        const double u = rng.uniform() * total_;
        auto it = std::lower_bound(cumulative_.begin() + 1, cumulative_.end(), u);
        return static_cast<int32_t>(it - cumulative_.begin());
    }

private:
    std::vector<double> cumulative_;
    double total_ = 0.0;
};

void init_uniform(std::vector<double>& v, double scale, Rng& rng) {
    for (double& x : v) x = rng.uniform(-scale, scale);
}

// Linear decay to 10% of the base rate across epochs.
double epoch_lr(const EmbedConfig& cfg, int epoch) {
    if (cfg.epochs == 1) return cfg.learning_rate;
    const double t = static_cast<double>(epoch) / static_cast<double>(cfg.epochs - 1);
    return cfg.learning_rate * (1.0 - 0.9 * t);
}

void check_finite(double loss, int epoch, int64_t step, const char* trainer) {
    if (!std::isfinite(loss)) {
        throw NumericError(std::string(trainer) + ": non-finite loss at epoch " +
                           std::to_string(epoch + 1) + ", step " + std::to_string(step));
    }
}

struct PairTrainer {
    // One negative-sampling update of the hidden vector h against the positive
    // target and sampled negatives; accumulates the h-gradient into neu1e and
    // updates the output rows in place. Returns the pair loss.
    static double update(const double* h, double* neu1e, std::vector<double>& syn1,
                         int32_t positive, const NoiseTable& noise, Rng& rng,
                         int negatives, int dim, double lr) {
        double loss = 0.0;
        for (int k = 0; k <= negatives; ++k) {
            int32_t target;
            double label;
            if (k == 0) {
                target = positive;
                label = 1.0;
            } else {
                target = noise.sample(rng);
                if (target == positive) continue; // skip accidental positives
                label = 0.0;
            }
            double* out_row = syn1.data() + static_cast<int64_t>(target) * dim;
            double score = 0.0;
            for (int j = 0; j < dim; ++j) score += h[j] * out_row[j];
            loss += label == 1.0 ? neg_log_sigmoid(score) : neg_log_sigmoid(-score);
            const double g = (label - sigmoid(score)) * lr;
            for (int j = 0; j < dim; ++j) {
                neu1e[j] += g * out_row[j];
                out_row[j] += g * h[j];
            }
        }
        return loss;
    }
};

} // namespace

double ns_pair_loss(double positive_score, const std::vector<double>& negative_scores) {
    double loss = neg_log_sigmoid(positive_score);
    for (double s : negative_scores) loss += neg_log_sigmoid(-s);
    return loss;
}

EmbedResult train_word2vec(const TokenStreams& docs, const Vocabulary& vocab,
                           PredictiveMode mode, const EmbedConfig& cfg) {
    cfg.validate();
    const int m_tokens = vocab.m_tokens();
    if (m_tokens == 0) throw DataError("train_word2vec: empty vocabulary");
    bool any_token = false;
    for (const auto& doc : docs) any_token |= !doc.empty();
    if (!any_token) throw DataError("train_word2vec: empty corpus");

    const int s = cfg.dim;
    const int64_t rows = static_cast<int64_t>(m_tokens) + 1;
    std::vector<double> syn0(rows * s), syn1(rows * s, 0.0);
    Rng rng(cfg.seed);
    init_uniform(syn0, 0.5 / s, rng);
    std::fill(syn0.begin(), syn0.begin() + s, 0.0); // padding row stays zero

    const NoiseTable noise(docs, m_tokens);
    std::vector<double> h(s), neu1e(s);
    EmbedResult result;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = epoch_lr(cfg, epoch);
        double epoch_loss = 0.0;
        int64_t pairs = 0;
        for (const auto& doc : docs) {
            const int64_t len = static_cast<int64_t>(doc.size());
            for (int64_t t = 0; t < len; ++t) {
                const int64_t lo = std::max<int64_t>(0, t - cfg.window);
                const int64_t hi = std::min(len - 1, t + cfg.window);
                if (mode == PredictiveMode::Cbow) {
                    const int64_t context_n = hi - lo; // excludes the center itself
                    if (context_n <= 0) continue;
                    std::fill(h.begin(), h.end(), 0.0);
                    for (int64_t c = lo; c <= hi; ++c) {
                        if (c == t) continue;
                        const double* row = syn0.data() + static_cast<int64_t>(doc[c]) * s;
                        for (int j = 0; j < s; ++j) h[j] += row[j];
                    }
                    for (int j = 0; j < s; ++j) h[j] /= static_cast<double>(context_n);
                    std::fill(neu1e.begin(), neu1e.end(), 0.0);
                    epoch_loss += PairTrainer::update(h.data(), neu1e.data(), syn1, doc[t],
                                                      noise, rng, cfg.negatives, s, lr);
                    ++pairs;
                    check_finite(epoch_loss, epoch, pairs, "train_word2vec");
                    for (int64_t c = lo; c <= hi; ++c) {
                        if (c == t) continue;
                        double* row = syn0.data() + static_cast<int64_t>(doc[c]) * s;
                        for (int j = 0; j < s; ++j) row[j] += neu1e[j];
                    }
                } else {
                    double* center = syn0.data() + static_cast<int64_t>(doc[t]) * s;
                    for (int64_t c = lo; c <= hi; ++c) {
                        if (c == t) continue;
                        std::fill(neu1e.begin(), neu1e.end(), 0.0);
                        epoch_loss += PairTrainer::update(center, neu1e.data(), syn1, doc[c],
                                                          noise, rng, cfg.negatives, s, lr);
                        ++pairs;
                        check_finite(epoch_loss, epoch, pairs, "train_word2vec");
                        for (int j = 0; j < s; ++j) center[j] += neu1e[j];
                    }
                }
            }
        }
        result.epoch_loss.push_back(pairs ? epoch_loss / static_cast<double>(pairs) : 0.0);
    }

    std::map<int32_t, std::vector<double>> vectors;
    for (int32_t id = 1; id <= m_tokens; ++id) {
        vectors[id] = {syn0.begin() + static_cast<int64_t>(id) * s,
                       syn0.begin() + static_cast<int64_t>(id + 1) * s};
    }
    result.matrix = assemble_matrix(vectors, vocab, s);
    result.matrix.model_tag =
        model_name(mode == PredictiveMode::Cbow ? EmbedModel::Word2VecCbow
                                                : EmbedModel::Word2VecSkipGram);
    return result;
}

std::vector<std::string> fasttext_ngrams(const std::string& word, int min_ngram, int max_ngram) {
    const std::string padded = "<" + word + ">";
    std::vector<std::string> grams;
    const int len = static_cast<int>(padded.size());
    for (int n = min_ngram; n <= max_ngram; ++n) {
        for (int i = 0; i + n <= len; ++i) grams.push_back(padded.substr(i, n));
    }
    return grams;
}

EmbedResult train_fasttext(const TokenStreams& docs, const Vocabulary& vocab,
                           PredictiveMode mode, const EmbedConfig& cfg) {
    cfg.validate();
    const int m_tokens = vocab.m_tokens();
    if (m_tokens == 0) throw DataError("train_fasttext: empty vocabulary");
    bool any_token = false;
    for (const auto& doc : docs) any_token |= !doc.empty();
    if (!any_token) throw DataError("train_fasttext: empty corpus");

    const int s = cfg.dim;
    const int64_t rows = static_cast<int64_t>(m_tokens) + 1;

    // constituent rows per word: its own row in syn0 plus hashed n-gram buckets
    std::vector<std::vector<int32_t>> buckets_of(rows);
    for (int32_t id = 1; id <= m_tokens; ++id) {
        for (const auto& gram : fasttext_ngrams(vocab.id_to_lemma[id], cfg.min_ngram, cfg.max_ngram)) {
            buckets_of[id].push_back(static_cast<int32_t>(fnv1a64(gram) % cfg.ngram_buckets));
        }
    }

    std::vector<double> syn0(rows * s), gram_table(static_cast<int64_t>(cfg.ngram_buckets) * s);
    std::vector<double> syn1(rows * s, 0.0);
    Rng rng(cfg.seed);
    init_uniform(syn0, 0.5 / s, rng);
    init_uniform(gram_table, 0.5 / s, rng);
    std::fill(syn0.begin(), syn0.begin() + s, 0.0);

    const NoiseTable noise(docs, m_tokens);
    std::vector<double> h(s), neu1e(s);
    std::vector<double*> input_rows;
    EmbedResult result;

    auto collect_rows = [&](int32_t word_id) {
        input_rows.push_back(syn0.data() + static_cast<int64_t>(word_id) * s);
        for (int32_t b : buckets_of[word_id])
            input_rows.push_back(gram_table.data() + static_cast<int64_t>(b) * s);
    };

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = epoch_lr(cfg, epoch);
        double epoch_loss = 0.0;
        int64_t pairs = 0;
        for (const auto& doc : docs) {
            const int64_t len = static_cast<int64_t>(doc.size());
            for (int64_t t = 0; t < len; ++t) {
                const int64_t lo = std::max<int64_t>(0, t - cfg.window);
                const int64_t hi = std::min(len - 1, t + cfg.window);
                if (mode == PredictiveMode::Cbow) {
                    input_rows.clear();
                    for (int64_t c = lo; c <= hi; ++c)
                        if (c != t) collect_rows(doc[c]);
                    if (input_rows.empty()) continue;
                    std::fill(h.begin(), h.end(), 0.0);
                    for (const double* row : input_rows)
                        for (int j = 0; j < s; ++j) h[j] += row[j];
                    for (int j = 0; j < s; ++j) h[j] /= static_cast<double>(input_rows.size());
                    std::fill(neu1e.begin(), neu1e.end(), 0.0);
                    epoch_loss += PairTrainer::update(h.data(), neu1e.data(), syn1, doc[t],
                                                      noise, rng, cfg.negatives, s, lr);
                    ++pairs;
                    check_finite(epoch_loss, epoch, pairs, "train_fasttext");
                    for (double* row : input_rows)
                        for (int j = 0; j < s; ++j) row[j] += neu1e[j];
                } else {
                    input_rows.clear();
                    collect_rows(doc[t]);
                    std::fill(h.begin(), h.end(), 0.0);
                    for (const double* row : input_rows)
                        for (int j = 0; j < s; ++j) h[j] += row[j];
                    for (int j = 0; j < s; ++j) h[j] /= static_cast<double>(input_rows.size());
                    for (int64_t c = lo; c <= hi; ++c) {
                        if (c == t) continue;
                        std::fill(neu1e.begin(), neu1e.end(), 0.0);
                        epoch_loss += PairTrainer::update(h.data(), neu1e.data(), syn1, doc[c],
                                                          noise, rng, cfg.negatives, s, lr);
                        ++pairs;
                        check_finite(epoch_loss, epoch, pairs, "train_fasttext");
                        for (double* row : input_rows)
                            for (int j = 0; j < s; ++j) row[j] += neu1e[j];
                        // h is stale after the row updates; recompute for the next pair
                        std::fill(h.begin(), h.end(), 0.0);
                        for (const double* row : input_rows)
                            for (int j = 0; j < s; ++j) h[j] += row[j];
                        for (int j = 0; j < s; ++j) h[j] /= static_cast<double>(input_rows.size());
                    }
                }
            }
        }
        result.epoch_loss.push_back(pairs ? epoch_loss / static_cast<double>(pairs) : 0.0);
    }

    // final per-word vector: mean of the word row and its n-gram rows
    std::map<int32_t, std::vector<double>> vectors;
    for (int32_t id = 1; id <= m_tokens; ++id) {
        std::vector<double> v(syn0.begin() + static_cast<int64_t>(id) * s,
                              syn0.begin() + static_cast<int64_t>(id + 1) * s);
        for (int32_t b : buckets_of[id]) {
            const double* row = gram_table.data() + static_cast<int64_t>(b) * s;
            for (int j = 0; j < s; ++j) v[j] += row[j];
        }
        const double denom = 1.0 + static_cast<double>(buckets_of[id].size());
        for (int j = 0; j < s; ++j) v[j] /= denom;
        vectors[id] = std::move(v);
    }
    result.matrix = assemble_matrix(vectors, vocab, s);
    result.matrix.model_tag =
        model_name(mode == PredictiveMode::Cbow ? EmbedModel::FastTextCbow
                                                : EmbedModel::FastTextSkipGram);
    return result;
}

CooccurrenceTable build_cooccurrence(const TokenStreams& docs, const Vocabulary& vocab,
                                     int window) {
    if (window < 1) throw DataError("build_cooccurrence: window must be >= 1");
    (void)vocab;
    std::unordered_map<int64_t, double> acc;
    for (const auto& doc : docs) {
        const int64_t len = static_cast<int64_t>(doc.size());
        for (int64_t t = 0; t < len; ++t) {
            const int64_t hi = std::min(len - 1, t + window);
            for (int64_t c = t + 1; c <= hi; ++c) {
                const double w = 1.0 / static_cast<double>(c - t);
                const int64_t key_fwd = (static_cast<int64_t>(doc[t]) << 32) | doc[c];
                const int64_t key_bwd = (static_cast<int64_t>(doc[c]) << 32) | doc[t];
                acc[key_fwd] += w;
                acc[key_bwd] += w;
            }
        }
    }
    CooccurrenceTable table;
    table.entries.reserve(acc.size());
    for (const auto& [key, weight] : acc) {
        table.entries.push_back({static_cast<int32_t>(key >> 32),
                                 static_cast<int32_t>(key & 0xffffffff), weight});
    }
    std::sort(table.entries.begin(), table.entries.end(), [](const CoocEntry& a, const CoocEntry& b) {
        return std::pair{a.center, a.context} < std::pair{b.center, b.context};
    });
    return table;
}

namespace {

// Shared GloVe engine; Mittens is the same objective with the anchor penalty.
// Full-batch per epoch with per-coordinate adaptive steps: accumulators start
// at 1 and the squared gradient is added before the division, which keeps the
// first step bounded by the learning rate even under huge penalty weights.
EmbedResult train_glove_engine(const CooccurrenceTable& cooc, const Vocabulary& vocab,
                               const std::map<int32_t, std::vector<double>>& anchors,
                               double mu, const EmbedConfig& cfg, const char* tag) {
    cfg.validate();
    if (cooc.empty()) throw DataError("train_glove: empty co-occurrence table");
    const int s = cfg.dim;
    const int64_t rows = static_cast<int64_t>(vocab.m_tokens()) + 1;

    Rng rng(cfg.seed);
    std::vector<double> w(rows * s), wt(rows * s); // w and w~ (context) vectors
    std::vector<double> b(rows, 0.0), bt(rows, 0.0);
    init_uniform(w, 0.5 / s, rng);
    init_uniform(wt, 0.5 / s, rng);

    std::vector<double> gw(rows * s, 0.0), gwt(rows * s, 0.0), gb(rows, 0.0), gbt(rows, 0.0);
    std::vector<double> aw(rows * s, 1.0), awt(rows * s, 1.0), ab(rows, 1.0), abt(rows, 1.0);

    EmbedResult result;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::fill(gw.begin(), gw.end(), 0.0);
        std::fill(gwt.begin(), gwt.end(), 0.0);
        std::fill(gb.begin(), gb.end(), 0.0);
        std::fill(gbt.begin(), gbt.end(), 0.0);

        double loss = 0.0;
        for (const CoocEntry& e : cooc.entries) {
            const double* wi = w.data() + static_cast<int64_t>(e.center) * s;
            const double* wj = wt.data() + static_cast<int64_t>(e.context) * s;
            double dot = 0.0;
            for (int j = 0; j < s; ++j) dot += wi[j] * wj[j];
            const double diff = dot + b[e.center] + bt[e.context] - std::log(e.weight);
            const double fx = std::min(1.0, std::pow(e.weight / cfg.x_max, cfg.alpha));
            loss += fx * diff * diff;
            const double g = 2.0 * fx * diff;
            double* gwi = gw.data() + static_cast<int64_t>(e.center) * s;
            double* gwj = gwt.data() + static_cast<int64_t>(e.context) * s;
            for (int j = 0; j < s; ++j) {
                gwi[j] += g * wj[j];
                gwj[j] += g * wi[j];
            }
            gb[e.center] += g;
            gbt[e.context] += g;
        }
        if (mu != 0.0) {
            for (const auto& [id, anchor] : anchors) {
                const double* wi = w.data() + static_cast<int64_t>(id) * s;
                const double* wj = wt.data() + static_cast<int64_t>(id) * s;
                double* gwi = gw.data() + static_cast<int64_t>(id) * s;
                double* gwj = gwt.data() + static_cast<int64_t>(id) * s;
                for (int j = 0; j < s; ++j) {
                    const double d = wi[j] + wj[j] - anchor[j];
                    loss += mu * d * d;
                    gwi[j] += 2.0 * mu * d;
                    gwj[j] += 2.0 * mu * d;
                }
            }
        }
        if (!std::isfinite(loss)) {
            throw NumericError(std::string(tag) + ": non-finite loss at epoch " +
                               std::to_string(epoch + 1));
        }
        result.epoch_loss.push_back(loss);

        auto adagrad = [&](std::vector<double>& theta, std::vector<double>& grad,
                           std::vector<double>& acc, int64_t offset, int64_t count) {
            for (int64_t i = offset; i < offset + count; ++i) {
                acc[i] += grad[i] * grad[i];
                theta[i] -= cfg.learning_rate * grad[i] / std::sqrt(acc[i]);
            }
        };
        // row 0 is padding and never appears in the table; skip it
        adagrad(w, gw, aw, s, (rows - 1) * s);
        adagrad(wt, gwt, awt, s, (rows - 1) * s);
        adagrad(b, gb, ab, 1, rows - 1);
        adagrad(bt, gbt, abt, 1, rows - 1);
    }

    std::map<int32_t, std::vector<double>> vectors;
    for (int32_t id = 1; id < rows; ++id) {
        std::vector<double> v(s);
        for (int j = 0; j < s; ++j) v[j] = w[static_cast<int64_t>(id) * s + j] +
                                           wt[static_cast<int64_t>(id) * s + j];
        vectors[id] = std::move(v);
    }
    result.matrix = assemble_matrix(vectors, vocab, s);
    result.matrix.model_tag = tag;
    return result;
}

} // namespace

EmbedResult train_glove(const CooccurrenceTable& cooc, const Vocabulary& vocab,
                        const EmbedConfig& cfg) {
    return train_glove_engine(cooc, vocab, {}, 0.0, cfg, "glove");
}

EmbedResult train_mittens(const CooccurrenceTable& cooc, const Vocabulary& vocab,
                          const std::map<std::string, std::vector<double>>& anchors,
                          const EmbedConfig& cfg) {
    std::map<int32_t, std::vector<double>> by_id;
    for (const auto& [lemma, vec] : anchors) {
        if (static_cast<int>(vec.size()) != cfg.dim) {
            throw DataError("train_mittens: anchor \"" + lemma + "\" has dimension " +
                            std::to_string(vec.size()) + ", expected " + std::to_string(cfg.dim));
        }
        auto it = vocab.lemma_to_id.find(lemma);
        if (it != vocab.lemma_to_id.end()) by_id[it->second] = vec;
    }
    return train_glove_engine(cooc, vocab, by_id, cfg.mittens_mu, cfg, "mittens");
}

EmbeddingMatrix assemble_matrix(const std::map<int32_t, std::vector<double>>& vectors,
                                const Vocabulary& vocab, int64_t s) {
    EmbeddingMatrix matrix;
    matrix.m = static_cast<int64_t>(vocab.m_tokens()) + 1;
    matrix.s = s;
    matrix.data.assign(matrix.m * s, 0.0);
    for (int32_t id = 1; id < matrix.m; ++id) {
        auto it = vectors.find(id);
        if (it == vectors.end())
            throw DataError("assemble_matrix: missing vector for id " + std::to_string(id));
        if (static_cast<int64_t>(it->second.size()) != s)
            throw DataError("assemble_matrix: vector for id " + std::to_string(id) +
                            " has wrong dimension");
        std::copy(it->second.begin(), it->second.end(), matrix.row(id));
    }
    return matrix;
}

void save_vectors(const EmbeddingMatrix& matrix, const Vocabulary& vocab,
                  const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write vector file: " + path);
    out << vocab.m_tokens() << ' ' << matrix.s << '\n';
    char buf[64];
    for (int32_t id = 1; id < matrix.m; ++id) {
        out << vocab.id_to_lemma[id];
        const double* row = matrix.row(id);
        for (int64_t j = 0; j < matrix.s; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", row[j]);
            out << ' ' << buf;
        }
        out << '\n';
    }
}

EmbeddingMatrix load_vectors(const Vocabulary& vocab, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open vector file: " + path);
    int64_t m_tokens = 0, s = 0;
    in >> m_tokens >> s;
    if (!in || m_tokens <= 0 || s <= 0) throw DataError("malformed vector file header: " + path);
    if (m_tokens != vocab.m_tokens())
        throw DataError("vector file vocabulary size " + std::to_string(m_tokens) +
                        " does not match the loaded vocabulary (" +
                        std::to_string(vocab.m_tokens()) + ")");
    EmbeddingMatrix matrix;
    matrix.m = m_tokens + 1;
    matrix.s = s;
    matrix.data.assign(matrix.m * s, 0.0);
    for (int64_t i = 0; i < m_tokens; ++i) {
        std::string lemma;
        in >> lemma;
        auto it = vocab.lemma_to_id.find(lemma);
        if (it == vocab.lemma_to_id.end())
            throw DataError("vector file word \"" + lemma + "\" not in vocabulary");
        double* row = matrix.row(it->second);
        for (int64_t j = 0; j < s; ++j) in >> row[j];
        if (!in) throw DataError("truncated vector file: " + path);
    }
    for (double v : matrix.data) {
        if (!std::isfinite(v)) throw DataError("vector file has non-finite entries: " + path);
    }
    return matrix;
}

void save_cooccurrence(const CooccurrenceTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write co-occurrence file: " + path);
    char buf[64];
    for (const CoocEntry& e : table.entries) {
        std::snprintf(buf, sizeof(buf), "%.17g", e.weight);
        out << e.center << ',' << e.context << ',' << buf << '\n';
    }
}

} // namespace danes::embed
