#include "danes/ingest.hpp"
#include "danes/common.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace danes::ingest {

using nlohmann::json;

DatasetKind parse_kind(const std::string& name) {
    if (name == "buzzface") return DatasetKind::BuzzFace;
    if (name == "twitter15") return DatasetKind::Twitter15;
    if (name == "twitter16") return DatasetKind::Twitter16;
    throw DataError("unknown dataset kind: " + name);
}

std::string kind_name(DatasetKind kind) {
    switch (kind) {
    case DatasetKind::BuzzFace: return "buzzface";
    case DatasetKind::Twitter15: return "twitter15";
    case DatasetKind::Twitter16: return "twitter16";
    }
    return "?";
}

const std::vector<std::string>& feature_names(DatasetKind kind) {
    static const std::vector<std::string> buzzface = {
        "comments count", "shares count",    "likes count",     "love emoji count",
        "wow emoji count", "haha emoji count", "sad emoji count", "angry emoji count",
    };
    static const std::vector<std::string> twitter = {
        "likes count",         "retweet count",     "user followers count",
        "user friends count",  "user lists count",  "user favorites count",
    };
    return kind == DatasetKind::BuzzFace ? buzzface : twitter;
}

const std::map<std::string, int>& label_encoding(DatasetKind kind) {
    static const std::map<std::string, int> buzzface = {
        {"mostly true", 0},
        {"mixture of true and false", 1},
        {"no factual content", 2},
        {"mostly false", 3},
    };
    static const std::map<std::string, int> twitter = {
        {"true", 0},
        {"false", 1},
        {"unverified", 2},
        {"non-rumor", 3},
    };
    return kind == DatasetKind::BuzzFace ? buzzface : twitter;
}

bool Dataset::operator==(const Dataset& other) const {
    if (kind != other.kind || posts.size() != other.posts.size()) return false;
    for (size_t i = 0; i < posts.size(); ++i) {
        const Post& a = posts[i];
        const Post& b = other.posts[i];
        if (a.id != b.id || a.text != b.text || a.label != b.label || a.social != b.social)
            return false;
    }
    return true;
}

LoadResult load_dataset(const std::string& path, DatasetKind kind) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file: " + path);

    const auto& features = feature_names(kind);
    const auto& labels = label_encoding(kind);

    LoadResult result;
    Dataset& d = result.dataset;
    d.name = path;
    d.kind = kind;
    d.feature_names_ = features;
    for (const auto& [name, id] : labels) d.label_names[id] = name;

    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError("record " + std::to_string(line_no) + ": invalid JSON: " + e.what());
        }
        const std::string where = "record " + std::to_string(line_no);

        Post post;
        if (!rec.contains("text") || !rec["text"].is_string())
            throw DataError(where + ": missing text field");
        post.text = rec["text"].get<std::string>();
        post.id = rec.value("id", std::to_string(line_no));

        if (!rec.contains("label") || !rec["label"].is_string())
            throw DataError(where + ": missing label field");
        const std::string label_str = rec["label"].get<std::string>();
        auto label_it = labels.find(label_str);
        if (label_it == labels.end())
            throw DataError(where + " (id " + post.id + "): unknown label \"" + label_str + "\"");
        post.label = label_it->second;

        if (!rec.contains("social") || !rec["social"].is_object())
            throw DataError(where + " (id " + post.id + "): missing social object");
        const json& social = rec["social"];
        post.social.reserve(features.size());
        for (const auto& feat : features) {
            if (!social.contains(feat))
                throw DataError(where + " (id " + post.id + "): missing feature \"" + feat + "\"");
            if (!social[feat].is_number())
                throw DataError(where + " (id " + post.id + "): feature \"" + feat + "\" is not a number");
            post.social.push_back(social[feat].get<double>());
        }
        for (const auto& [key, value] : social.items()) {
            (void)value;
            bool known = false;
            for (const auto& feat : features) {
                if (key == feat) { known = true; break; }
            }
            if (!known) ++result.ignored_keys;
        }
        for (const auto& [key, value] : rec.items()) {
            (void)value;
            if (key != "id" && key != "text" && key != "label" && key != "social")
                ++result.ignored_keys;
        }

        d.posts.push_back(std::move(post));
    }

    if (d.posts.empty()) throw DataError("empty dataset: " + path);
    return result;
}

void save_dataset(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write dataset file: " + path);
    for (const Post& post : d.posts) {
        json rec;
        rec["id"] = post.id;
        rec["text"] = post.text;
        rec["label"] = d.label_names.at(post.label);
        json social = json::object();
        for (size_t j = 0; j < d.feature_names_.size(); ++j) {
            social[d.feature_names_[j]] = post.social[j];
        }
        rec["social"] = social;
        out << rec.dump() << "\n";
    }
}

DatasetStats dataset_stats(const Dataset& d) {
    DatasetStats stats;
    stats.n = d.n();
    stats.f = d.f();
    for (const Post& post : d.posts) ++stats.class_histogram[post.label];
    return stats;
}

} // namespace danes::ingest
