#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace danes::textprep {

// Ordered contraction table (key, expansion); keys match case-insensitively on
// word boundaries, longest key first.
const std::vector<std::pair<std::string, std::string>>& contraction_table();

std::string expand_contractions(const std::string& text);

// Rule-based lemmatizer: irregular lookup, then ordered suffix rules
// (plural endings, "ing"/"ed" with stem fixups). Input must be lowercase.
std::string lemmatize(const std::string& word);

// Punctuation removal (deleted, not replaced), lowercasing, whitespace
// tokenization, lemmatization. Empty tokens are dropped.
std::vector<std::string> normalize_and_tokenize(const std::string& text);

struct Vocabulary {
    std::unordered_map<std::string, int> lemma_to_id; // ids start at 1
    std::vector<std::string> id_to_lemma;             // index 0 reserved for padding
    int m_tokens() const { return static_cast<int>(id_to_lemma.size()) - 1; }
    int rows() const { return static_cast<int>(id_to_lemma.size()); } // m = m_tokens + 1
};

// Ids assigned in first-occurrence order scanning documents in order, tokens
// left to right. Id 0 is never assigned (padding).
Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& corpus);

struct TokenMatrix {
    int64_t n = 0;
    int64_t k = 0;                  // maximum document length in the corpus
    std::vector<int32_t> data;      // row-major n x k, left zero padded
    std::vector<int32_t> doc_lengths;

    int32_t at(int64_t i, int64_t j) const { return data[i * k + j]; }
    // per-document id stream with the padding stripped
    std::vector<int32_t> tokens(int64_t i) const;
};

TokenMatrix encode_documents(const std::vector<std::vector<std::string>>& corpus,
                             const Vocabulary& vocab);

std::vector<std::string> decode_document(const TokenMatrix& matrix, int64_t row,
                                         const Vocabulary& vocab);

// Exports: one "id<TAB>lemma" per line; token matrix as integer CSV.
void save_vocabulary(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocabulary(const std::string& path);
void save_token_matrix(const TokenMatrix& matrix, const std::string& path);
TokenMatrix load_token_matrix(const std::string& path);

} // namespace danes::textprep
