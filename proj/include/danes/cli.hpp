#pragma once

#include "danes/embed.hpp"
#include "danes/ingest.hpp"
#include "danes/model.hpp"
#include "danes/social.hpp"
#include "danes/train.hpp"

#include <optional>
#include <string>
#include <vector>

namespace danes::cli {

inline constexpr const char* kVersion = "0.1.0";

// Preprocessed artifacts of one dataset directory.
struct PrepData {
    ingest::DatasetKind kind = ingest::DatasetKind::BuzzFace;
    textprep::Vocabulary vocab;
    textprep::TokenMatrix tokens;
    social::SocialMatrix social_raw;
    std::vector<int> labels;
};

PrepData load_prep(const std::string& prep_dir);

struct PreprocessSummary {
    size_t n = 0;
    int64_t k = 0;
    int vocab_size = 0;
    size_t f = 0;
    size_t ignored_keys = 0;
};

// Writes vocab.tsv, tokens.csv, social.csv, labels.csv, stats.json and
// manifest.json into out_dir.
PreprocessSummary cmd_preprocess(const std::string& input_path, const std::string& kind,
                                 const std::string& out_dir);

// Trains one embedding model on a prep directory; writes <model>.vec,
// <model>.loss.csv and manifest.json.
void cmd_train_embeddings(const std::string& prep_dir, const std::string& model,
                          const embed::EmbedConfig& cfg,
                          const std::optional<std::string>& anchors_path,
                          const std::string& out_dir);

struct TrainSingleResult {
    train::RunResult run;
    bool kernel_capped = false;
};

// Trains and evaluates a single configuration; writes result.json, model.ckpt
// (+ .json sidecar), scaler.json when the social branch is on, and manifest.json.
TrainSingleResult cmd_train(const std::string& prep_dir, const std::string& vectors_path,
                            model::ModelConfig cfg, const train::TrainOptions& opts,
                            const std::string& out_dir);

// Full ablation over the grid; writes report.csv, report.md, run.jsonl and
// manifest.json. Returns false when any cell recorded an error row.
bool cmd_ablate(const std::string& prep_dir, const std::vector<std::string>& vector_paths,
                const std::optional<std::string>& grid_path, train::AblationOptions opts,
                const std::string& out_dir);

// Per-kind text CNN kernel sizes (uni, bi).
std::pair<int64_t, int64_t> default_kernels(ingest::DatasetKind kind);

} // namespace danes::cli
