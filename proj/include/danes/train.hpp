#pragma once

#include "danes/model.hpp"
#include "danes/social.hpp"
#include "danes/textprep.hpp"

#include <optional>
#include <string>
#include <vector>

namespace danes::train {

struct SplitSpec {
    double train_frac = 0.7;
    double val_frac_of_train = 0.2;
};

struct Splits {
    std::vector<int64_t> train, val, test;
};

// Shuffled per class, per-class counts by floor + largest fractional part
// (ties broken by class id). Validation is carved from train the same way.
Splits stratified_split(const std::vector<int>& labels, const SplitSpec& spec, uint64_t seed);

// An epoch improves iff val_loss < best - min_delta; stop after `patience`
// consecutive non-improving epochs.
class EarlyStopping {
public:
    EarlyStopping(int patience, double min_delta) : patience_(patience), min_delta_(min_delta) {}

    bool observe(double val_loss); // true when the epoch improved
    bool should_stop() const { return bad_epochs_ >= patience_; }
    double best_loss() const { return best_loss_; }
    int bad_epochs() const { return bad_epochs_; }

private:
    int patience_;
    double min_delta_;
    double best_loss_ = std::numeric_limits<double>::infinity();
    int bad_epochs_ = 0;
};

struct TrainOptions {
    int epochs_max = 100;
    int patience = 20;
    int batch = 32;
    double min_delta = 1e-6;
    tensor::AdamConfig adam;
    uint64_t seed = 42;
};

struct History {
    std::vector<double> train_loss, val_loss;
    int best_epoch = 0; // 1-based
    int epochs_ran = 0;
    bool stopped_early = false;
};

struct TrainOutcome {
    History history;
    std::optional<social::Scaler> scaler; // fitted on the train slice only
    double runtime_seconds = 0.0;
};

// Fits the scaler on the train indices (the only fit call in the pipeline),
// trains with mini-batches and early stopping on validation loss, and
// restores the parameters of the best-validation-loss epoch.
TrainOutcome train_model(model::DanesModel& model, const textprep::TokenMatrix& tokens,
                         const social::SocialMatrix* social_raw, const std::vector<int>& labels,
                         const Splits& splits, const TrainOptions& opts);

struct Metrics {
    double accuracy = 0.0;
    double precision_weighted = 0.0;
    double recall_weighted = 0.0;
    double precision_macro = 0.0;
    double recall_macro = 0.0;
};

// Support-weighted one-vs-rest precision/recall; classes never predicted
// contribute precision 0.
Metrics compute_metrics(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                        int classes);

struct RunResult {
    Metrics metrics;
    double runtime_seconds = 0.0;
    int epochs_ran = 0;
    bool stopped_early = false;
    uint64_t seed = 0;
};

RunResult evaluate(model::DanesModel& model, const textprep::TokenMatrix& tokens,
                   const social::SocialMatrix* social_std, const std::vector<int>& labels,
                   const std::vector<int64_t>& test_indices, int batch = 32);

// helpers shared with the CLI
tensor::IntMatrix gather_tokens(const textprep::TokenMatrix& tokens,
                                const std::vector<int64_t>& indices);
tensor::Tensor gather_social(const social::SocialMatrix& social,
                             const std::vector<int64_t>& indices);

// ---- ablation harness ------------------------------------------------------

// One topology row of the report tables; the text RNN is always present.
struct TopologyRow {
    bool text_cnn = false;
    bool social_branch = false;
    bool social_cnn = false;
};

struct AblationGrid {
    std::vector<TopologyRow> rows;
    std::vector<tensor::CellType> cells;
    std::vector<bool> directions; // false = uni, true = bi

    static AblationGrid default_grid();
    static AblationGrid from_json_file(const std::string& path);
};

struct MetricAggregate {
    double mean = 0.0, stddev = 0.0;
};

struct CellResult {
    std::string embedding;
    tensor::CellType cell = tensor::CellType::Gru;
    bool bidirectional = false;
    TopologyRow row;
    std::vector<RunResult> runs;
    MetricAggregate accuracy, precision, recall, precision_macro, recall_macro, runtime;
    bool best_flag = false;
    std::string error; // nonempty when the cell aborted
    bool kernel_capped = false;
};

struct AblationReport {
    std::vector<CellResult> cells;
    int runs = 0;
};

struct AblationOptions {
    int runs = 10;
    uint64_t base_seed = 42;
    int workers = 1;
    int64_t text_kernel_uni = 64;
    int64_t text_kernel_bi = 128;
    int64_t rnn_units = 128;
    int64_t conv_filters = 64;
    int64_t pool_width = 2;
    double dropout_ff = 0.2;
    double dropout_rec = 0.2;
    TrainOptions train;
    SplitSpec split;
};

struct EmbeddingInput {
    std::string name;
    const embed::EmbeddingMatrix* matrix = nullptr;
};

AblationReport run_ablation(const textprep::TokenMatrix& tokens,
                            const social::SocialMatrix& social_raw,
                            const std::vector<int>& labels,
                            const std::vector<EmbeddingInput>& embeddings,
                            const AblationGrid& grid, const AblationOptions& opts);

void emit_report_csv(const AblationReport& report, const std::string& path);
void emit_report_markdown(const AblationReport& report, const std::string& path);
void save_runs_jsonl(const AblationReport& report, const std::string& path);

// Recompute the aggregates from a persisted run.jsonl (report verification).
AblationReport load_runs_jsonl(const std::string& path);

} // namespace danes::train
