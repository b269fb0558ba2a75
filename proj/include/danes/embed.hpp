#pragma once

#include "danes/textprep.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace danes::embed {

struct EmbedConfig {
    int window = 10;          // symmetric context radius
    int dim = 128;            // embedding components s
    int epochs = 100;
    double learning_rate = 0.05;
    int negatives = 5;        // negative samples (Word2Vec / FastText)
    int min_ngram = 3;        // FastText character n-gram range
    int max_ngram = 6;
    int ngram_buckets = 200000;
    double x_max = 100.0;     // GloVe weighting
    double alpha = 0.75;
    double mittens_mu = 0.1;
    uint64_t seed = 42;

    void validate() const;
};

enum class EmbedModel { Word2VecCbow, Word2VecSkipGram, FastTextCbow, FastTextSkipGram, Glove, Mittens };

EmbedModel parse_model(const std::string& name);
std::string model_name(EmbedModel model);

struct EmbeddingMatrix {
    int64_t m = 0;   // vocabulary rows incl. padding row 0
    int64_t s = 0;
    std::vector<double> data; // row-major m x s, row 0 all zeros
    std::string model_tag;

    const double* row(int64_t id) const { return data.data() + id * s; }
    double* row(int64_t id) { return data.data() + id * s; }
};

struct CoocEntry {
    int32_t center = 0;
    int32_t context = 0;
    double weight = 0.0;
};

struct CooccurrenceTable {
    std::vector<CoocEntry> entries; // sorted by (center, context)
    double weight(int32_t center, int32_t context) const;
    bool empty() const { return entries.empty(); }
};

enum class PredictiveMode { Cbow, SkipGram };

struct EmbedResult {
    EmbeddingMatrix matrix;
    std::vector<double> epoch_loss; // one entry per epoch
};

using TokenStreams = std::vector<std::vector<int32_t>>;

// Strip the padding out of a token matrix into per-document id streams.
TokenStreams token_streams(const textprep::TokenMatrix& matrix);

// Negative-sampling loss of one (positive, negatives) score set; the trainers
// accumulate it into the per-epoch curve.
double ns_pair_loss(double positive_score, const std::vector<double>& negative_scores);

EmbedResult train_word2vec(const TokenStreams& docs, const textprep::Vocabulary& vocab,
                           PredictiveMode mode, const EmbedConfig& cfg);

// Character n-grams of the boundary-wrapped word, lengths in [min_ngram, max_ngram].
std::vector<std::string> fasttext_ngrams(const std::string& word, int min_ngram, int max_ngram);

EmbedResult train_fasttext(const TokenStreams& docs, const textprep::Vocabulary& vocab,
                           PredictiveMode mode, const EmbedConfig& cfg);

// Ordered pairs within distance d <= window inside one document get weight 1/d.
CooccurrenceTable build_cooccurrence(const TokenStreams& docs, const textprep::Vocabulary& vocab,
                                     int window);

EmbedResult train_glove(const CooccurrenceTable& cooc, const textprep::Vocabulary& vocab,
                        const EmbedConfig& cfg);

// GloVe objective plus mu * sum over anchored words of ||(w + w~) - r||^2.
// Anchor lemmas missing from the vocabulary are ignored.
EmbedResult train_mittens(const CooccurrenceTable& cooc, const textprep::Vocabulary& vocab,
                          const std::map<std::string, std::vector<double>>& anchors,
                          const EmbedConfig& cfg);

EmbeddingMatrix assemble_matrix(const std::map<int32_t, std::vector<double>>& vectors,
                                const textprep::Vocabulary& vocab, int64_t s);

// Vector file: first line "m_tokens s", then one "lemma v1 ... vs" per word.
// Row 0 is implicit and never written.
void save_vectors(const EmbeddingMatrix& matrix, const textprep::Vocabulary& vocab,
                  const std::string& path);
EmbeddingMatrix load_vectors(const textprep::Vocabulary& vocab, const std::string& path);

void save_cooccurrence(const CooccurrenceTable& table, const std::string& path);

} // namespace danes::embed
