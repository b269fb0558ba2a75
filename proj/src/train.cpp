#include "danes/train.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace danes::train {

using nlohmann::json;
using tensor::IntMatrix;
using tensor::Tensor;

namespace {

// largest-remainder apportionment of round(total * frac) across classes
std::map<int, int64_t> per_class_take(const std::map<int, int64_t>& class_counts, double frac) {
    int64_t total = 0;
    for (const auto& [cls, count] : class_counts) total += count;
    const auto target = static_cast<int64_t>(std::llround(static_cast<double>(total) * frac));

    std::map<int, int64_t> take;
    std::vector<std::pair<double, int>> remainders; // (-fraction, class id) for sorting
    int64_t base_sum = 0;
    for (const auto& [cls, count] : class_counts) {
        const double exact = static_cast<double>(count) * frac;
        const auto base = static_cast<int64_t>(std::floor(exact));
        take[cls] = base;
        base_sum += base;
        remainders.push_back({-(exact - static_cast<double>(base)), cls});
    }
    std::sort(remainders.begin(), remainders.end()); // largest fraction first, then class id
    int64_t leftover = target - base_sum;
    for (const auto& [neg_frac, cls] : remainders) {
        if (leftover <= 0) break;
        if (take[cls] < class_counts.at(cls)) {
            ++take[cls];
            --leftover;
        }
    }
    return take;
}

void shuffle_indices(std::vector<int64_t>& v, Rng& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        const size_t j = rng.uniform_index(i);
        std::swap(v[i - 1], v[j]);
    }
}

int argmax_row(const Tensor& probs, int64_t row) {
    const int64_t classes = probs.shape[1];
    int best = 0;
    for (int64_t j = 1; j < classes; ++j)
        if (probs.at2(row, j) > probs.at2(row, best)) best = static_cast<int>(j);
    return best;
}

} // namespace

Splits stratified_split(const std::vector<int>& labels, const SplitSpec& spec, uint64_t seed) {
    std::map<int, std::vector<int64_t>> by_class;
    for (size_t i = 0; i < labels.size(); ++i)
        by_class[labels[i]].push_back(static_cast<int64_t>(i));
    if (by_class.size() < 2)
        throw DataError("stratified_split: need at least 2 classes, got " +
                        std::to_string(by_class.size()));
    for (const auto& [cls, idx] : by_class) {
        if (idx.size() < 3)
            throw DataError("stratified_split: class " + std::to_string(cls) + " has only " +
                            std::to_string(idx.size()) + " samples (need >= 3)");
    }

    Rng rng(seed);
    std::map<int, int64_t> class_counts;
    for (auto& [cls, idx] : by_class) {
        shuffle_indices(idx, rng);
        class_counts[cls] = static_cast<int64_t>(idx.size());
    }

    const auto train_take = per_class_take(class_counts, spec.train_frac);

    Splits splits;
    std::map<int, std::vector<int64_t>> train_by_class;
    for (auto& [cls, idx] : by_class) {
        const int64_t take = train_take.at(cls);
        train_by_class[cls].assign(idx.begin(), idx.begin() + take);
        splits.test.insert(splits.test.end(), idx.begin() + take, idx.end());
    }

    std::map<int, int64_t> train_counts;
    for (const auto& [cls, idx] : train_by_class)
        train_counts[cls] = static_cast<int64_t>(idx.size());
    const auto val_take = per_class_take(train_counts, spec.val_frac_of_train);
    for (const auto& [cls, idx] : train_by_class) {
        const int64_t take = val_take.at(cls);
        splits.val.insert(splits.val.end(), idx.begin(), idx.begin() + take);
        splits.train.insert(splits.train.end(), idx.begin() + take, idx.end());
    }

    std::sort(splits.train.begin(), splits.train.end());
    std::sort(splits.val.begin(), splits.val.end());
    std::sort(splits.test.begin(), splits.test.end());
    return splits;
}

bool EarlyStopping::observe(double val_loss) {
    if (val_loss < best_loss_ - min_delta_) {
        best_loss_ = val_loss;
        bad_epochs_ = 0;
        return true;
    }
    ++bad_epochs_;
    return false;
}

IntMatrix gather_tokens(const textprep::TokenMatrix& tokens, const std::vector<int64_t>& indices) {
    IntMatrix out;
    out.rows = static_cast<int64_t>(indices.size());
    out.cols = tokens.k;
    out.data.reserve(out.rows * out.cols);
    for (int64_t i : indices) {
        out.data.insert(out.data.end(), tokens.data.begin() + i * tokens.k,
                        tokens.data.begin() + (i + 1) * tokens.k);
    }
    return out;
}

Tensor gather_social(const social::SocialMatrix& social, const std::vector<int64_t>& indices) {
    Tensor out({static_cast<int64_t>(indices.size()), social.f});
    for (size_t r = 0; r < indices.size(); ++r) {
        const int64_t i = indices[r];
        std::copy(social.data.begin() + i * social.f, social.data.begin() + (i + 1) * social.f,
                  out.data.begin() + static_cast<int64_t>(r) * social.f);
    }
    return out;
}

namespace {

std::vector<int> gather_labels(const std::vector<int>& labels, const std::vector<int64_t>& idx) {
    std::vector<int> out;
    out.reserve(idx.size());
    for (int64_t i : idx) out.push_back(labels[i]);
    return out;
}

double batched_eval_loss(model::DanesModel& model, const textprep::TokenMatrix& tokens,
                         const social::SocialMatrix* social_std, const std::vector<int>& labels,
                         const std::vector<int64_t>& indices, int batch) {
    double total = 0.0;
    int64_t count = 0;
    const bool social_on = model.config().social_branch_enabled;
    for (size_t start = 0; start < indices.size(); start += batch) {
        const size_t end = std::min(indices.size(), start + batch);
        std::vector<int64_t> slice(indices.begin() + start, indices.begin() + end);
        const IntMatrix ids = gather_tokens(tokens, slice);
        Tensor social;
        if (social_on) social = gather_social(*social_std, slice);
        const double loss = model.compute_loss(ids, social_on ? &social : nullptr,
                                               gather_labels(labels, slice), false, nullptr);
        total += loss * static_cast<double>(slice.size());
        count += static_cast<int64_t>(slice.size());
    }
    return total / static_cast<double>(count);
}

} // namespace

TrainOutcome train_model(model::DanesModel& model, const textprep::TokenMatrix& tokens,
                         const social::SocialMatrix* social_raw, const std::vector<int>& labels,
                         const Splits& splits, const TrainOptions& opts) {
    const auto start_time = std::chrono::steady_clock::now();
    const bool social_on = model.config().social_branch_enabled;
    if (social_on && social_raw == nullptr)
        throw DataError("train_model: model has a social branch but no social matrix given");

    TrainOutcome outcome;
    social::SocialMatrix social_std;
    if (social_on) {
        // the one and only scaler fit, on the train slice
        outcome.scaler = social::fit_scaler(social_raw->rows(splits.train));
        social_std = social::transform(*social_raw, *outcome.scaler);
    }

    Rng rng(opts.seed);
    EarlyStopping stopping(opts.patience, opts.min_delta);
    std::vector<std::vector<double>> best_snapshot = model.snapshot_values();
    History& history = outcome.history;

    std::vector<int64_t> order = splits.train;
    for (int epoch = 1; epoch <= opts.epochs_max; ++epoch) {
        shuffle_indices(order, rng);
        double train_total = 0.0;
        int64_t seen = 0;
        int64_t step = 0;
        for (size_t start = 0; start < order.size(); start += opts.batch) {
            const size_t end = std::min(order.size(), start + opts.batch);
            std::vector<int64_t> slice(order.begin() + start, order.begin() + end);
            const IntMatrix ids = gather_tokens(tokens, slice);
            Tensor social;
            if (social_on) social = gather_social(social_std, slice);
            const std::vector<int> batch_labels = gather_labels(labels, slice);

            model.params().zero_grad();
            const double loss = model.compute_loss(ids, social_on ? &social : nullptr,
                                                   batch_labels, true, &rng);
            ++step;
            if (!std::isfinite(loss))
                throw NumericError("train_model: non-finite loss at epoch " +
                                   std::to_string(epoch) + ", step " + std::to_string(step));
            model.backward(batch_labels);
            tensor::adam_update(model.params(), opts.adam);

            train_total += loss * static_cast<double>(slice.size());
            seen += static_cast<int64_t>(slice.size());
        }
        history.train_loss.push_back(train_total / static_cast<double>(seen));

        const double val_loss = batched_eval_loss(model, tokens, social_on ? &social_std : nullptr,
                                                  labels, splits.val, opts.batch);
        if (!std::isfinite(val_loss))
            throw NumericError("train_model: non-finite validation loss at epoch " +
                               std::to_string(epoch));
        history.val_loss.push_back(val_loss);
        history.epochs_ran = epoch;

        if (stopping.observe(val_loss)) {
            best_snapshot = model.snapshot_values();
            history.best_epoch = epoch;
        }
        if (stopping.should_stop()) {
            history.stopped_early = true;
            break;
        }
    }

    model.restore_values(best_snapshot);
    outcome.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
    return outcome;
}

Metrics compute_metrics(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                        int classes) {
    if (y_true.size() != y_pred.size() || y_true.empty())
        throw DataError("compute_metrics: label/prediction vectors empty or mismatched");
    std::vector<int64_t> tp(classes, 0), pred_count(classes, 0), support(classes, 0);
    int64_t correct = 0;
    for (size_t i = 0; i < y_true.size(); ++i) {
        ++support[y_true[i]];
        ++pred_count[y_pred[i]];
        if (y_true[i] == y_pred[i]) {
            ++tp[y_true[i]];
            ++correct;
        }
    }
    const auto total = static_cast<double>(y_true.size());
    Metrics m;
    m.accuracy = static_cast<double>(correct) / total;
    for (int c = 0; c < classes; ++c) {
        const double prec =
            pred_count[c] > 0 ? static_cast<double>(tp[c]) / static_cast<double>(pred_count[c])
                              : 0.0;
        const double rec =
            support[c] > 0 ? static_cast<double>(tp[c]) / static_cast<double>(support[c]) : 0.0;
        const double weight = static_cast<double>(support[c]) / total;
        m.precision_weighted += weight * prec;
        m.recall_weighted += weight * rec;
        m.precision_macro += prec / static_cast<double>(classes);
        m.recall_macro += rec / static_cast<double>(classes);
    }
    return m;
}

RunResult evaluate(model::DanesModel& model, const textprep::TokenMatrix& tokens,
                   const social::SocialMatrix* social_std, const std::vector<int>& labels,
                   const std::vector<int64_t>& test_indices, int batch) {
    if (test_indices.empty()) throw DataError("evaluate: empty test set");
    const bool social_on = model.config().social_branch_enabled;
    std::vector<int> y_true, y_pred;
    y_true.reserve(test_indices.size());
    y_pred.reserve(test_indices.size());
    for (size_t start = 0; start < test_indices.size(); start += batch) {
        const size_t end = std::min(test_indices.size(), start + batch);
        std::vector<int64_t> slice(test_indices.begin() + start, test_indices.begin() + end);
        const IntMatrix ids = gather_tokens(tokens, slice);
        Tensor social;
        if (social_on) social = gather_social(*social_std, slice);
        const Tensor probs = model.predict(ids, social_on ? &social : nullptr);
        for (size_t r = 0; r < slice.size(); ++r) {
            y_true.push_back(labels[slice[r]]);
            y_pred.push_back(argmax_row(probs, static_cast<int64_t>(r)));
        }
    }
    RunResult result;
    result.metrics = compute_metrics(y_true, y_pred, static_cast<int>(model.config().classes));
    return result;
}

// ---- ablation ---------------------------------------------------------------

AblationGrid AblationGrid::default_grid() {
    AblationGrid grid;
    grid.rows = {
        {false, false, false}, // text RNN only
        {true, false, false},  // text RNN + CNN
        {false, true, false},  // text RNN, social RNN
        {false, true, true},   // text RNN, social RNN + CNN
        {true, true, false},   // text RNN + CNN, social RNN
        {true, true, true},    // text RNN + CNN, social RNN + CNN
    };
    grid.cells = {tensor::CellType::Gru, tensor::CellType::Lstm};
    grid.directions = {false, true};
    return grid;
}

AblationGrid AblationGrid::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open grid file: " + path);
    json doc = json::parse(in);
    AblationGrid grid;
    for (const auto& row : doc.at("rows")) {
        TopologyRow r;
        r.text_cnn = row.value("text_cnn", false);
        r.social_branch = row.value("social_rnn", false);
        r.social_cnn = row.value("social_cnn", false);
        if (r.social_cnn && !r.social_branch)
            throw DataError("grid file: social_cnn requires social_rnn");
        grid.rows.push_back(r);
    }
    for (const auto& cell : doc.at("cells")) grid.cells.push_back(tensor::parse_cell(cell));
    for (const auto& dir : doc.at("directions")) {
        const std::string name = dir.get<std::string>();
        if (name != "uni" && name != "bi") throw DataError("grid file: direction must be uni|bi");
        grid.directions.push_back(name == "bi");
    }
    if (grid.rows.empty() || grid.cells.empty() || grid.directions.empty())
        throw DataError("grid file: empty grid");
    return grid;
}

namespace {

MetricAggregate aggregate(const std::vector<double>& values) {
    MetricAggregate agg;
    if (values.empty()) return agg;
    double sum = 0.0;
    for (double v : values) sum += v;
    agg.mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - agg.mean) * (v - agg.mean);
    agg.stddev = std::sqrt(sq / static_cast<double>(values.size()));
    return agg;
}

void aggregate_cell(CellResult& cell) {
    std::vector<double> acc, prec, rec, prec_m, rec_m, runtime;
    for (const RunResult& r : cell.runs) {
        acc.push_back(r.metrics.accuracy);
        prec.push_back(r.metrics.precision_weighted);
        rec.push_back(r.metrics.recall_weighted);
        prec_m.push_back(r.metrics.precision_macro);
        rec_m.push_back(r.metrics.recall_macro);
        runtime.push_back(r.runtime_seconds);
    }
    cell.accuracy = aggregate(acc);
    cell.precision = aggregate(prec);
    cell.recall = aggregate(rec);
    cell.precision_macro = aggregate(prec_m);
    cell.recall_macro = aggregate(rec_m);
    cell.runtime = aggregate(runtime);
}

void flag_best(AblationReport& report) {
    // best accuracy per (embedding, direction), error cells excluded
    std::map<std::pair<std::string, bool>, size_t> best;
    for (size_t i = 0; i < report.cells.size(); ++i) {
        const CellResult& cell = report.cells[i];
        if (!cell.error.empty()) continue;
        const auto key = std::make_pair(cell.embedding, cell.bidirectional);
        auto it = best.find(key);
        if (it == best.end() || cell.accuracy.mean > report.cells[it->second].accuracy.mean)
            best[key] = i;
    }
    for (const auto& [key, index] : best) report.cells[index].best_flag = true;
}

} // namespace

AblationReport run_ablation(const textprep::TokenMatrix& tokens,
                            const social::SocialMatrix& social_raw,
                            const std::vector<int>& labels,
                            const std::vector<EmbeddingInput>& embeddings,
                            const AblationGrid& grid, const AblationOptions& opts) {
    if (embeddings.empty()) throw DataError("run_ablation: no embeddings given");
    if (grid.rows.empty()) throw DataError("run_ablation: empty grid");

    AblationReport report;
    report.runs = opts.runs;
    for (const EmbeddingInput& emb : embeddings) {
        for (tensor::CellType cell : grid.cells) {
            for (bool bi : grid.directions) {
                for (const TopologyRow& row : grid.rows) {
                    CellResult result;
                    result.embedding = emb.name;
                    result.cell = cell;
                    result.bidirectional = bi;
                    result.row = row;
                    result.runs.resize(opts.runs);
                    report.cells.push_back(std::move(result));
                }
            }
        }
    }

    struct Task {
        size_t cell_index;
        int run_index;
    };
    std::vector<Task> tasks;
    for (size_t c = 0; c < report.cells.size(); ++c)
        for (int r = 0; r < opts.runs; ++r) tasks.push_back({c, r});

    std::vector<std::string> run_errors(tasks.size());
    std::vector<char> run_capped(tasks.size(), 0);
    const auto embedding_of = [&](const std::string& name) -> const embed::EmbeddingMatrix* {
        for (const EmbeddingInput& e : embeddings)
            if (e.name == name) return e.matrix;
        return nullptr;
    };

    auto execute = [&](const Task& task) {
        CellResult& cell = report.cells[task.cell_index];
        const uint64_t run_seed = opts.base_seed + static_cast<uint64_t>(task.run_index);
        try {
            const Splits splits = stratified_split(labels, opts.split, run_seed);

            model::ModelConfig cfg;
            cfg.cell = cell.cell;
            cfg.bidirectional = cell.bidirectional;
            cfg.text_cnn = cell.row.text_cnn;
            cfg.social_branch_enabled = cell.row.social_branch;
            cfg.social_cnn = cell.row.social_cnn;
            cfg.rnn_units = opts.rnn_units;
            cfg.text_kernel = cell.bidirectional ? opts.text_kernel_bi : opts.text_kernel_uni;
            cfg.social_kernel = cfg.text_kernel;
            cfg.conv_filters = opts.conv_filters;
            cfg.pool_width = opts.pool_width;
            cfg.dropout_ff = opts.dropout_ff;
            cfg.dropout_rec = opts.dropout_rec;
            cfg.seed = run_seed;

            model::DanesModel model(cfg, embedding_of(cell.embedding), tokens.k, social_raw.f);

            TrainOptions train_opts = opts.train;
            train_opts.seed = run_seed;
            const TrainOutcome outcome =
                train_model(model, tokens, cfg.social_branch_enabled ? &social_raw : nullptr,
                            labels, splits, train_opts);

            social::SocialMatrix social_std;
            if (outcome.scaler) social_std = social::transform(social_raw, *outcome.scaler);
            RunResult run = evaluate(model, tokens, outcome.scaler ? &social_std : nullptr,
                                     labels, splits.test, train_opts.batch);
            run.runtime_seconds = outcome.runtime_seconds;
            run.epochs_ran = outcome.history.epochs_ran;
            run.stopped_early = outcome.history.stopped_early;
            run.seed = run_seed;
            run_capped[&task - tasks.data()] = model.kernel_capped() ? 1 : 0;
            cell.runs[task.run_index] = run;
        } catch (const std::exception& e) {
            run_errors[&task - tasks.data()] = e.what();
        }
    };

    const int workers = std::max(1, opts.workers);
    if (workers == 1) {
        for (const Task& task : tasks) execute(task);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (true) {
                    const size_t i = next.fetch_add(1);
                    if (i >= tasks.size()) break;
                    execute(tasks[i]);
                }
            });
        }
        for (std::thread& t : pool) t.join();
    }

    for (size_t i = 0; i < tasks.size(); ++i) {
        if (!run_errors[i].empty() && report.cells[tasks[i].cell_index].error.empty())
            report.cells[tasks[i].cell_index].error =
                "run " + std::to_string(tasks[i].run_index) + ": " + run_errors[i];
        if (run_capped[i]) report.cells[tasks[i].cell_index].kernel_capped = true;
    }
    for (CellResult& cell : report.cells) {
        if (!cell.error.empty()) {
            cell.runs.clear();
            continue;
        }
        aggregate_cell(cell);
    }
    flag_best(report);
    return report;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void emit_rows(const AblationReport& report, std::ostream& out, const char* sep,
               const char* line_prefix, const char* line_suffix) {
    for (const CellResult& cell : report.cells) {
        out << line_prefix << cell.embedding << sep << tensor::cell_name(cell.cell) << sep
            << (cell.bidirectional ? "bi" : "uni") << sep << 1 << sep << cell.row.text_cnn << sep
            << cell.row.social_branch << sep << cell.row.social_cnn << sep;
        if (cell.error.empty()) {
            out << fmt(cell.accuracy.mean) << sep << fmt(cell.accuracy.stddev) << sep
                << fmt(cell.precision.mean) << sep << fmt(cell.precision.stddev) << sep
                << fmt(cell.recall.mean) << sep << fmt(cell.recall.stddev) << sep
                << fmt(cell.runtime.mean) << sep << fmt(cell.runtime.stddev) << sep
                << (cell.best_flag ? 1 : 0) << sep << fmt(cell.precision_macro.mean) << sep
                << fmt(cell.precision_macro.stddev) << sep << fmt(cell.recall_macro.mean) << sep
                << fmt(cell.recall_macro.stddev) << sep;
        } else {
            for (int i = 0; i < 13; ++i) out << "nan" << sep;
        }
        out << (cell.error.empty() ? "" : cell.error) << line_suffix << "\n";
    }
}

constexpr const char* kHeaderCols =
    "embedding,cell,direction,text_rnn,text_cnn,social_rnn,social_cnn,"
    "acc_mean,acc_std,prec_mean,prec_std,rec_mean,rec_std,runtime_mean,runtime_std,"
    "best_flag,prec_macro_mean,prec_macro_std,rec_macro_mean,rec_macro_std,error";

} // namespace

void emit_report_csv(const AblationReport& report, const std::string& path) {
    if (report.cells.empty()) throw DataError("emit_report: empty report");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write report: " + path);
    out << kHeaderCols << "\n";
    emit_rows(report, out, ",", "", "");
}

void emit_report_markdown(const AblationReport& report, const std::string& path) {
    if (report.cells.empty()) throw DataError("emit_report: empty report");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write report: " + path);
    std::string header = kHeaderCols;
    for (char& c : header)
        if (c == ',') c = '|';
    out << "|" << header << "|\n|";
    for (int i = 0; i < 21; ++i) out << "---|";
    out << "\n";
    emit_rows(report, out, "|", "|", "|");
}

void save_runs_jsonl(const AblationReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write run log: " + path);
    for (const CellResult& cell : report.cells) {
        for (size_t r = 0; r < cell.runs.size(); ++r) {
            const RunResult& run = cell.runs[r];
            json rec;
            rec["embedding"] = cell.embedding;
            rec["cell"] = tensor::cell_name(cell.cell);
            rec["direction"] = cell.bidirectional ? "bi" : "uni";
            rec["text_cnn"] = cell.row.text_cnn;
            rec["social_rnn"] = cell.row.social_branch;
            rec["social_cnn"] = cell.row.social_cnn;
            rec["run"] = r;
            rec["seed"] = run.seed;
            rec["accuracy"] = run.metrics.accuracy;
            rec["precision_weighted"] = run.metrics.precision_weighted;
            rec["recall_weighted"] = run.metrics.recall_weighted;
            rec["precision_macro"] = run.metrics.precision_macro;
            rec["recall_macro"] = run.metrics.recall_macro;
            rec["runtime_seconds"] = run.runtime_seconds;
            rec["epochs_ran"] = run.epochs_ran;
            rec["stopped_early"] = run.stopped_early;
            rec["kernel_capped"] = cell.kernel_capped;
            out << rec.dump() << "\n";
        }
        if (!cell.error.empty()) {
            json rec;
            rec["embedding"] = cell.embedding;
            rec["cell"] = tensor::cell_name(cell.cell);
            rec["direction"] = cell.bidirectional ? "bi" : "uni";
            rec["text_cnn"] = cell.row.text_cnn;
            rec["social_rnn"] = cell.row.social_branch;
            rec["social_cnn"] = cell.row.social_cnn;
            rec["error"] = cell.error;
            out << rec.dump() << "\n";
        }
    }
}

AblationReport load_runs_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open run log: " + path);
    AblationReport report;
    std::map<std::tuple<std::string, std::string, std::string, bool, bool, bool>, size_t> index;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json rec = json::parse(line);
        const auto key = std::make_tuple(
            rec.at("embedding").get<std::string>(), rec.at("cell").get<std::string>(),
            rec.at("direction").get<std::string>(), rec.value("text_cnn", false),
            rec.value("social_rnn", false), rec.value("social_cnn", false));
        auto it = index.find(key);
        if (it == index.end()) {
            CellResult cell;
            cell.embedding = std::get<0>(key);
            cell.cell = tensor::parse_cell(std::get<1>(key));
            cell.bidirectional = std::get<2>(key) == "bi";
            cell.row = {std::get<3>(key), std::get<4>(key), std::get<5>(key)};
            index[key] = report.cells.size();
            report.cells.push_back(std::move(cell));
            it = index.find(key);
        }
        CellResult& cell = report.cells[it->second];
        if (rec.contains("error")) {
            cell.error = rec["error"].get<std::string>();
            continue;
        }
        RunResult run;
        run.metrics.accuracy = rec.at("accuracy").get<double>();
        run.metrics.precision_weighted = rec.at("precision_weighted").get<double>();
        run.metrics.recall_weighted = rec.at("recall_weighted").get<double>();
        run.metrics.precision_macro = rec.at("precision_macro").get<double>();
        run.metrics.recall_macro = rec.at("recall_macro").get<double>();
        run.runtime_seconds = rec.at("runtime_seconds").get<double>();
        run.epochs_ran = rec.at("epochs_ran").get<int>();
        run.stopped_early = rec.at("stopped_early").get<bool>();
        run.seed = rec.at("seed").get<uint64_t>();
        cell.runs.push_back(run);
    }
    for (CellResult& cell : report.cells) {
        if (cell.error.empty()) aggregate_cell(cell);
        report.runs = std::max(report.runs, static_cast<int>(cell.runs.size()));
    }
    flag_best(report);
    return report;
}

} // namespace danes::train
