#include "danes/textprep.hpp"
#include "danes/common.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace danes::textprep {

namespace {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '\'';
}

bool matches_key_ci(const std::string& text, size_t pos, const std::string& key) {
    if (pos + key.size() > text.size()) return false;
    for (size_t i = 0; i < key.size(); ++i) {
        char a = static_cast<char>(std::tolower(static_cast<unsigned char>(text[pos + i])));
        char b = static_cast<char>(std::tolower(static_cast<unsigned char>(key[i])));
        if (a != b) return false;
    }
    // whole-token match: the next char must not extend the word
    return pos + key.size() == text.size() || !is_word_char(text[pos + key.size()]);
}

// Unicode punctuation blocks removed alongside ASCII punctuation/symbols.
bool is_unicode_punct(uint32_t cp) {
    return (cp >= 0x00A1 && cp <= 0x00BF) || // Latin-1 punctuation and signs
           (cp >= 0x2000 && cp <= 0x206F) || // general punctuation (quotes, dashes, ellipsis)
           (cp >= 0x2E00 && cp <= 0x2E7F) || // supplemental punctuation
           (cp >= 0x3000 && cp <= 0x303F) || // CJK symbols and punctuation
           (cp >= 0xFE30 && cp <= 0xFE6F) || // CJK compatibility forms, small form variants
           (cp >= 0xFF01 && cp <= 0xFF0F) || // fullwidth ASCII punctuation
           (cp >= 0xFF1A && cp <= 0xFF20) ||
           (cp >= 0xFF3B && cp <= 0xFF40) ||
           (cp >= 0xFF5B && cp <= 0xFF65);
}

// Decodes one UTF-8 codepoint; on malformed input consumes one byte and
// reports it as-is so the byte is preserved.
uint32_t next_codepoint(const std::string& s, size_t& i, size_t& len) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) { len = 1; return b0; }
    int extra = 0;
    uint32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) { extra = 1; cp = b0 & 0x1F; }
    else if ((b0 & 0xF0) == 0xE0) { extra = 2; cp = b0 & 0x0F; }
    else if ((b0 & 0xF8) == 0xF0) { extra = 3; cp = b0 & 0x07; }
    else { len = 1; return b0; }
    if (i + extra >= s.size()) { len = 1; return b0; }
    for (int k = 1; k <= extra; ++k) {
        const auto bk = static_cast<unsigned char>(s[i + k]);
        if ((bk & 0xC0) != 0x80) { len = 1; return b0; }
        cp = (cp << 6) | (bk & 0x3F);
    }
    len = static_cast<size_t>(extra) + 1;
    return cp;
}

const std::unordered_map<std::string, std::string>& irregular_forms() {
    static const std::unordered_map<std::string, std::string> map = {
        {"am", "be"},      {"is", "be"},      {"are", "be"},    {"was", "be"},
        {"were", "be"},    {"been", "be"},    {"being", "be"},
        {"has", "have"},   {"had", "have"},   {"having", "have"},
        {"does", "do"},    {"did", "do"},     {"done", "do"},   {"doing", "do"},
        {"goes", "go"},    {"went", "go"},    {"gone", "go"},   {"going", "go"},
        {"said", "say"},   {"says", "say"},
        {"got", "get"},    {"gotten", "get"},
        {"made", "make"},
        {"came", "come"},  {"coming", "come"},
        {"saw", "see"},    {"seen", "see"},
        {"knew", "know"},  {"known", "know"},
        {"thought", "think"},
        {"men", "man"},    {"women", "woman"}, {"children", "child"},
        {"feet", "foot"},  {"teeth", "tooth"}, {"mice", "mouse"},
        {"geese", "goose"},
        {"lives", "life"}, {"wives", "wife"},  {"knives", "knife"},
        {"leaves", "leaf"},{"selves", "self"},
    };
    return map;
}

const std::unordered_set<std::string>& final_s_keep() {
    static const std::unordered_set<std::string> set = {
        "this", "his", "its", "as", "news", "series", "species", "always",
        "perhaps", "whereas", "besides", "plus", "thus", "yes", "gas", "less",
    };
    return set;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool contains_vowel(const std::string& s) {
    for (char c : s)
        if (is_vowel(c) || c == 'y') return true;
    return false;
}

// consonant-vowel-consonant ending (final consonant not w/x/y), the cue to
// restore a dropped silent "e": mak -> make
bool ends_cvc(const std::string& s) {
    if (s.size() < 3) return false;
    const char c1 = s[s.size() - 3], v = s[s.size() - 2], c2 = s[s.size() - 1];
    return !is_vowel(c1) && is_vowel(v) && !is_vowel(c2) && c2 != 'w' && c2 != 'x' && c2 != 'y';
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string strip_gerund_suffix(std::string w, const std::string& suffix) {
    if (!ends_with(w, suffix)) return w;
    std::string stem = w.substr(0, w.size() - suffix.size());
    if (stem.size() < 3 || !contains_vowel(stem)) return w;
    const char last = stem.back();
    const char prev = stem[stem.size() - 2];
    if (last == prev && !is_vowel(last) && last != 'l' && last != 's' && last != 'z') {
        stem.pop_back(); // running -> run
    } else if (ends_cvc(stem)) {
        stem.push_back('e'); // making -> make
    }
    return stem;
}

} // namespace

std::string expand_contractions(const std::string& text) {
    const auto& table = contraction_table();
    std::string out;
    out.reserve(text.size());
    size_t i = 0;
    while (i < text.size()) {
        const bool at_word_start = (i == 0) || !is_word_char(text[i - 1]);
        if (at_word_start) {
            bool replaced = false;
            for (const auto& [key, expansion] : table) {
                if (matches_key_ci(text, i, key)) {
                    out += expansion;
                    i += key.size();
                    replaced = true;
                    break;
                }
            }
            if (replaced) continue;
        }
        out += text[i];
        ++i;
    }
    return out;
}

std::string lemmatize(const std::string& word) {
    const auto& irregular = irregular_forms();
    if (auto it = irregular.find(word); it != irregular.end()) return it->second;
    if (final_s_keep().count(word)) return word;

    std::string w = word;

    // plural endings
    if (ends_with(w, "sses")) {
        w.resize(w.size() - 2);
    } else if (ends_with(w, "ies")) {
        if (w.size() > 4) {
            w.resize(w.size() - 3);
            w.push_back('y'); // studies -> study
        } else {
            w.pop_back(); // ties -> tie
        }
    } else if (ends_with(w, "xes") || ends_with(w, "ches") || ends_with(w, "shes") ||
               ends_with(w, "zes") || ends_with(w, "oes")) {
        w.resize(w.size() - 2);
    } else if (w.size() >= 4 && w.back() == 's' && !ends_with(w, "ss") &&
               !ends_with(w, "us") && !ends_with(w, "is")) {
        w.pop_back();
    }

    if (!ends_with(w, "eed")) { // leave feed/agreed-style words alone
        w = strip_gerund_suffix(std::move(w), "ing");
        w = strip_gerund_suffix(std::move(w), "ed");
    }
    return w;
}

std::vector<std::string> normalize_and_tokenize(const std::string& text) {
    const std::string expanded = expand_contractions(text);

    std::string cleaned;
    cleaned.reserve(expanded.size());
    size_t i = 0;
    while (i < expanded.size()) {
        size_t len = 1;
        const uint32_t cp = next_codepoint(expanded, i, len);
        if (cp < 0x80) {
            const auto c = static_cast<unsigned char>(cp);
            if (std::isalnum(c) || std::isspace(c)) {
                cleaned += static_cast<char>(std::tolower(c));
            }
            // other ASCII (punctuation and symbols) is removed
        } else if (!is_unicode_punct(cp)) {
            cleaned.append(expanded, i, len);
        }
        i += len;
    }

    std::vector<std::string> tokens;
    std::istringstream stream(cleaned);
    std::string tok;
    while (stream >> tok) {
        std::string lemma = lemmatize(tok);
        if (!lemma.empty()) tokens.push_back(std::move(lemma));
    }
    return tokens;
}

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& corpus) {
    if (corpus.empty()) throw DataError("build_vocabulary: empty corpus");
    Vocabulary vocab;
    vocab.id_to_lemma.push_back(""); // id 0 reserved for padding
    for (const auto& doc : corpus) {
        for (const auto& lemma : doc) {
            if (vocab.lemma_to_id.emplace(lemma, vocab.rows()).second) {
                vocab.id_to_lemma.push_back(lemma);
            }
        }
    }
    if (vocab.m_tokens() == 0) throw DataError("build_vocabulary: corpus has no tokens");
    return vocab;
}

std::vector<int32_t> TokenMatrix::tokens(int64_t i) const {
    std::vector<int32_t> ids;
    ids.reserve(doc_lengths[i]);
    for (int64_t j = k - doc_lengths[i]; j < k; ++j) ids.push_back(at(i, j));
    return ids;
}

TokenMatrix encode_documents(const std::vector<std::vector<std::string>>& corpus,
                             const Vocabulary& vocab) {
    TokenMatrix matrix;
    matrix.n = static_cast<int64_t>(corpus.size());
    for (const auto& doc : corpus) {
        matrix.k = std::max<int64_t>(matrix.k, static_cast<int64_t>(doc.size()));
    }
    matrix.data.assign(matrix.n * matrix.k, 0);
    matrix.doc_lengths.resize(matrix.n);
    for (int64_t i = 0; i < matrix.n; ++i) {
        const auto& doc = corpus[i];
        matrix.doc_lengths[i] = static_cast<int32_t>(doc.size());
        const int64_t pad = matrix.k - static_cast<int64_t>(doc.size());
        for (size_t j = 0; j < doc.size(); ++j) {
            auto it = vocab.lemma_to_id.find(doc[j]);
            if (it == vocab.lemma_to_id.end())
                throw DataError("encode_documents: token \"" + doc[j] + "\" not in vocabulary");
            matrix.data[i * matrix.k + pad + static_cast<int64_t>(j)] = it->second;
        }
    }
    return matrix;
}

std::vector<std::string> decode_document(const TokenMatrix& matrix, int64_t row,
                                         const Vocabulary& vocab) {
    std::vector<std::string> out;
    for (int32_t id : matrix.tokens(row)) out.push_back(vocab.id_to_lemma.at(id));
    return out;
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write vocabulary file: " + path);
    for (int id = 1; id <= vocab.m_tokens(); ++id) {
        out << id << '\t' << vocab.id_to_lemma[id] << '\n';
    }
}

Vocabulary load_vocabulary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open vocabulary file: " + path);
    Vocabulary vocab;
    vocab.id_to_lemma.push_back("");
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const size_t tab = line.find('\t');
        if (tab == std::string::npos) throw DataError("malformed vocabulary line: " + line);
        const int id = std::stoi(line.substr(0, tab));
        const std::string lemma = line.substr(tab + 1);
        if (id != vocab.rows())
            throw DataError("vocabulary ids must be contiguous from 1, got " + std::to_string(id));
        vocab.lemma_to_id.emplace(lemma, id);
        vocab.id_to_lemma.push_back(lemma);
    }
    if (vocab.m_tokens() == 0) throw DataError("empty vocabulary file: " + path);
    return vocab;
}

void save_token_matrix(const TokenMatrix& matrix, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write token matrix: " + path);
    for (int64_t i = 0; i < matrix.n; ++i) {
        for (int64_t j = 0; j < matrix.k; ++j) {
            if (j) out << ',';
            out << matrix.at(i, j);
        }
        out << '\n';
    }
}

TokenMatrix load_token_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open token matrix: " + path);
    TokenMatrix matrix;
    std::string line;
    std::vector<int32_t> values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        values.clear();
        std::istringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) values.push_back(std::stoi(cell));
        if (matrix.k == 0) matrix.k = static_cast<int64_t>(values.size());
        if (static_cast<int64_t>(values.size()) != matrix.k)
            throw DataError("ragged token matrix row in " + path);
        matrix.data.insert(matrix.data.end(), values.begin(), values.end());
        ++matrix.n;
    }
    matrix.doc_lengths.resize(matrix.n);
    for (int64_t i = 0; i < matrix.n; ++i) {
        int32_t len = 0;
        for (int64_t j = 0; j < matrix.k; ++j)
            if (matrix.at(i, j) != 0) ++len;
        matrix.doc_lengths[i] = len;
    }
    return matrix;
}

} // namespace danes::textprep
