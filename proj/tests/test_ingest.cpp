#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "danes/common.hpp"
#include "danes/ingest.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace danes;
using namespace danes::ingest;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream out(path);
    out << content;
    return path;
}

const char* kBuzzRecord =
    R"({"id":"p1","text":"Some news text","label":"mostly true","social":{"comments count":3,"shares count":1,"likes count":0,"love emoji count":0,"wow emoji count":0,"haha emoji count":0,"sad emoji count":0,"angry emoji count":0}})";

std::string twitter_record(const std::string& id, const std::string& label) {
    return R"({"id":")" + id + R"(","text":"tweet","label":")" + label +
           R"(","social":{"likes count":1,"retweet count":2,"user followers count":3,"user friends count":4,"user lists count":5,"user favorites count":6}})";
}

} // namespace

TEST_CASE("buzzface record maps labels and keeps the fixed feature order") {
    const auto path = write_temp("ingest_buzz.jsonl", std::string(kBuzzRecord) + "\n");
    const LoadResult result = load_dataset(path, DatasetKind::BuzzFace);
    const Dataset& d = result.dataset;
    REQUIRE(d.n() == 1);
    CHECK(d.posts[0].label == 0); // "mostly true" -> 0
    CHECK(d.f() == 8);
    CHECK(d.posts[0].social[0] == 3.0); // comments count first
    CHECK(d.posts[0].social[1] == 1.0); // shares count second
    CHECK(d.feature_names_[7] == "angry emoji count");
}

TEST_CASE("twitter non-rumor maps to 3 with 6 features") {
    const auto path = write_temp("ingest_tw.jsonl", twitter_record("t1", "non-rumor") + "\n");
    const Dataset d = load_dataset(path, DatasetKind::Twitter16).dataset;
    CHECK(d.posts[0].label == 3);
    CHECK(d.f() == 6);
}

TEST_CASE("label mapping is a bijection onto 0..3") {
    for (const DatasetKind kind : {DatasetKind::BuzzFace, DatasetKind::Twitter15}) {
        const auto& encoding = label_encoding(kind);
        CHECK(encoding.size() == 4);
        std::set<int> ids;
        for (const auto& [name, id] : encoding) ids.insert(id);
        CHECK(ids == std::set<int>{0, 1, 2, 3});
    }
}

TEST_CASE("empty file is rejected") {
    const auto path = write_temp("ingest_empty.jsonl", "");
    CHECK_THROWS_AS(load_dataset(path, DatasetKind::BuzzFace), DataError);
}

TEST_CASE("unknown label names the offending record") {
    const auto path = write_temp("ingest_badlabel.jsonl", twitter_record("t9", "bogus") + "\n");
    CHECK_THROWS_WITH_AS(load_dataset(path, DatasetKind::Twitter15),
                         doctest::Contains("unknown label"), DataError);
}

TEST_CASE("missing feature is rejected") {
    const auto path = write_temp(
        "ingest_missing.jsonl",
        R"({"id":"x","text":"t","label":"true","social":{"likes count":1}})" "\n");
    CHECK_THROWS_WITH_AS(load_dataset(path, DatasetKind::Twitter15),
                         doctest::Contains("missing feature"), DataError);
}

TEST_CASE("unknown extra keys are counted, not fatal") {
    const auto path = write_temp(
        "ingest_extra.jsonl",
        R"({"id":"x","text":"t","label":"true","bonus":1,"social":{"likes count":1,"retweet count":2,"user followers count":3,"user friends count":4,"user lists count":5,"user favorites count":6,"surprise":9}})" "\n");
    const LoadResult result = load_dataset(path, DatasetKind::Twitter15);
    CHECK(result.ignored_keys == 2);
}

TEST_CASE("dataset_stats histogram sums to n") {
    std::string content;
    content += twitter_record("a", "true") + "\n";
    content += twitter_record("b", "false") + "\n";
    content += twitter_record("c", "unverified") + "\n";
    content += twitter_record("d", "non-rumor") + "\n";
    const auto path = write_temp("ingest_stats.jsonl", content);
    const Dataset d = load_dataset(path, DatasetKind::Twitter15).dataset;
    const DatasetStats stats = dataset_stats(d);
    CHECK(stats.n == 4);
    CHECK(stats.f == 6);
    CHECK(stats.class_histogram == std::map<int, size_t>{{0, 1}, {1, 1}, {2, 1}, {3, 1}});
}

TEST_CASE("load is deterministic and round-trips through save") {
    std::string content;
    content += twitter_record("a", "true") + "\n";
    content += twitter_record("b", "unverified") + "\n";
    const auto path = write_temp("ingest_rt.jsonl", content);
    const Dataset d1 = load_dataset(path, DatasetKind::Twitter16).dataset;
    const Dataset d2 = load_dataset(path, DatasetKind::Twitter16).dataset;
    CHECK(d1 == d2);

    const auto path2 = (std::filesystem::temp_directory_path() / "ingest_rt2.jsonl").string();
    save_dataset(d1, path2);
    const Dataset d3 = load_dataset(path2, DatasetKind::Twitter16).dataset;
    CHECK(d1 == d3);
}
