#pragma once

#include <map>
#include <string>
#include <vector>

namespace danes::ingest {

enum class DatasetKind { BuzzFace, Twitter15, Twitter16 };

DatasetKind parse_kind(const std::string& name);
std::string kind_name(DatasetKind kind);

// Fixed per-kind column order for the social features; column identity must be
// stable for the scaler downstream.
const std::vector<std::string>& feature_names(DatasetKind kind);

// Class-string <-> id mapping for the kind (bijective).
const std::map<std::string, int>& label_encoding(DatasetKind kind);

struct Post {
    std::string id;
    std::string text;
    std::vector<double> social; // values in the kind's feature order
    int label = 0;              // in {0,1,2,3}
};

struct Dataset {
    std::string name;
    DatasetKind kind = DatasetKind::BuzzFace;
    std::vector<Post> posts;
    std::vector<std::string> feature_names_;     // ordered, length f
    std::map<int, std::string> label_names;      // class id -> string

    size_t n() const { return posts.size(); }
    size_t f() const { return feature_names_.size(); }

    bool operator==(const Dataset& other) const;
};

struct LoadResult {
    Dataset dataset;
    size_t ignored_keys = 0; // unknown extra JSON keys skipped, for the load summary
};

// Input is one JSON object per line: {"id", "text", "label", "social": {...}}.
// Labels are mapped per kind; social features are read in the kind's fixed
// column order. Unknown label strings, missing features and empty files are
// rejected with the offending record named.
LoadResult load_dataset(const std::string& path, DatasetKind kind);

// Serialize back to the interchange format (round-trips through load_dataset).
void save_dataset(const Dataset& d, const std::string& path);

struct DatasetStats {
    size_t n = 0;
    std::map<int, size_t> class_histogram;
    size_t f = 0;
};

DatasetStats dataset_stats(const Dataset& d);

} // namespace danes::ingest
