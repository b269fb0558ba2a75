#include "danes/cli.hpp"
#include "danes/common.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace danes::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open input for hashing: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

void write_manifest(const std::string& out_dir, const std::string& command, uint64_t seed,
                    const std::map<std::string, std::string>& input_hashes,
                    const std::vector<std::string>& outputs) {
    json doc;
    doc["tool"] = "danes";
    doc["version"] = kVersion;
    doc["command"] = command;
    doc["seed"] = seed;
    doc["inputs"] = input_hashes;
    doc["outputs"] = outputs;
    std::ofstream out(fs::path(out_dir) / "manifest.json");
    if (!out) throw DataError("cannot write manifest in " + out_dir);
    out << doc.dump(2) << "\n";
}

void save_labels(const std::vector<int>& labels, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write labels file: " + path);
    for (int label : labels) out << label << "\n";
}

std::vector<int> load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open labels file: " + path);
    std::vector<int> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) labels.push_back(std::stoi(line));
    }
    if (labels.empty()) throw DataError("empty labels file: " + path);
    return labels;
}

void save_loss_curve(const std::vector<double>& losses, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write loss curve: " + path);
    out << "epoch,loss\n";
    char buf[64];
    for (size_t i = 0; i < losses.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", losses[i]);
        out << (i + 1) << ',' << buf << "\n";
    }
}

} // namespace

std::pair<int64_t, int64_t> default_kernels(ingest::DatasetKind kind) {
    switch (kind) {
    case ingest::DatasetKind::BuzzFace: return {64, 128};
    case ingest::DatasetKind::Twitter15: return {32, 64};
    case ingest::DatasetKind::Twitter16: return {16, 32};
    }
    return {64, 128};
}

PreprocessSummary cmd_preprocess(const std::string& input_path, const std::string& kind_name,
                                 const std::string& out_dir) {
    const ingest::DatasetKind kind = ingest::parse_kind(kind_name);
    const ingest::LoadResult loaded = ingest::load_dataset(input_path, kind);
    const ingest::Dataset& dataset = loaded.dataset;

    std::vector<std::vector<std::string>> corpus;
    corpus.reserve(dataset.n());
    for (const ingest::Post& post : dataset.posts)
        corpus.push_back(textprep::normalize_and_tokenize(post.text));

    const textprep::Vocabulary vocab = textprep::build_vocabulary(corpus);
    const textprep::TokenMatrix tokens = textprep::encode_documents(corpus, vocab);

    social::SocialMatrix social;
    social.n = static_cast<int64_t>(dataset.n());
    social.f = static_cast<int64_t>(dataset.f());
    social.feature_names = dataset.feature_names_;
    social.data.reserve(social.n * social.f);
    std::vector<int> labels;
    labels.reserve(dataset.n());
    for (const ingest::Post& post : dataset.posts) {
        social.data.insert(social.data.end(), post.social.begin(), post.social.end());
        labels.push_back(post.label);
    }

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    textprep::save_vocabulary(vocab, (dir / "vocab.tsv").string());
    textprep::save_token_matrix(tokens, (dir / "tokens.csv").string());
    social::save_social_matrix(social, (dir / "social.csv").string());
    save_labels(labels, (dir / "labels.csv").string());

    const ingest::DatasetStats stats = ingest::dataset_stats(dataset);
    json stats_doc;
    stats_doc["dataset_kind"] = ingest::kind_name(kind);
    stats_doc["n"] = stats.n;
    stats_doc["k"] = tokens.k;
    stats_doc["vocab_size"] = vocab.m_tokens();
    stats_doc["f"] = stats.f;
    json hist = json::object();
    for (const auto& [cls, count] : stats.class_histogram) hist[std::to_string(cls)] = count;
    stats_doc["class_histogram"] = hist;
    stats_doc["ignored_keys"] = loaded.ignored_keys;
    {
        std::ofstream out(dir / "stats.json");
        if (!out) throw DataError("cannot write stats.json in " + out_dir);
        out << stats_doc.dump(2) << "\n";
    }
    write_manifest(out_dir, "preprocess", 0, {{input_path, hash_file(input_path)}},
                   {"vocab.tsv", "tokens.csv", "social.csv", "labels.csv", "stats.json"});

    PreprocessSummary summary;
    summary.n = stats.n;
    summary.k = tokens.k;
    summary.vocab_size = vocab.m_tokens();
    summary.f = stats.f;
    summary.ignored_keys = loaded.ignored_keys;
    return summary;
}

PrepData load_prep(const std::string& prep_dir) {
    const fs::path dir(prep_dir);
    PrepData prep;
    {
        std::ifstream in(dir / "stats.json");
        if (!in) throw DataError("cannot open stats.json in " + prep_dir);
        json doc = json::parse(in);
        prep.kind = ingest::parse_kind(doc.at("dataset_kind").get<std::string>());
    }
    prep.vocab = textprep::load_vocabulary((dir / "vocab.tsv").string());
    prep.tokens = textprep::load_token_matrix((dir / "tokens.csv").string());
    prep.social_raw = social::load_social_matrix((dir / "social.csv").string());
    prep.labels = load_labels((dir / "labels.csv").string());
    if (prep.tokens.n != prep.social_raw.n ||
        prep.tokens.n != static_cast<int64_t>(prep.labels.size()))
        throw DataError("prep directory is inconsistent: row counts differ");
    return prep;
}

void cmd_train_embeddings(const std::string& prep_dir, const std::string& model,
                          const embed::EmbedConfig& cfg,
                          const std::optional<std::string>& anchors_path,
                          const std::string& out_dir) {
    const embed::EmbedModel kind = embed::parse_model(model);
    const PrepData prep = load_prep(prep_dir);
    const embed::TokenStreams docs = embed::token_streams(prep.tokens);

    embed::EmbedResult result;
    switch (kind) {
    case embed::EmbedModel::Word2VecCbow:
        result = embed::train_word2vec(docs, prep.vocab, embed::PredictiveMode::Cbow, cfg);
        break;
    case embed::EmbedModel::Word2VecSkipGram:
        result = embed::train_word2vec(docs, prep.vocab, embed::PredictiveMode::SkipGram, cfg);
        break;
    case embed::EmbedModel::FastTextCbow:
        result = embed::train_fasttext(docs, prep.vocab, embed::PredictiveMode::Cbow, cfg);
        break;
    case embed::EmbedModel::FastTextSkipGram:
        result = embed::train_fasttext(docs, prep.vocab, embed::PredictiveMode::SkipGram, cfg);
        break;
    case embed::EmbedModel::Glove: {
        const auto cooc = embed::build_cooccurrence(docs, prep.vocab, cfg.window);
        fs::create_directories(out_dir);
        embed::save_cooccurrence(cooc, (fs::path(out_dir) / "cooc.csv").string());
        result = embed::train_glove(cooc, prep.vocab, cfg);
        break;
    }
    case embed::EmbedModel::Mittens: {
        const auto cooc = embed::build_cooccurrence(docs, prep.vocab, cfg.window);
        fs::create_directories(out_dir);
        embed::save_cooccurrence(cooc, (fs::path(out_dir) / "cooc.csv").string());
        std::map<std::string, std::vector<double>> anchors;
        if (anchors_path) {
            const embed::EmbeddingMatrix anchor_matrix =
                embed::load_vectors(prep.vocab, *anchors_path);
            for (int32_t id = 1; id < anchor_matrix.m; ++id) {
                anchors[prep.vocab.id_to_lemma[id]] = {anchor_matrix.row(id),
                                                       anchor_matrix.row(id) + anchor_matrix.s};
            }
        } else {
            // default anchors: a GloVe matrix trained on this corpus with the same config
            const embed::EmbedResult glove = embed::train_glove(cooc, prep.vocab, cfg);
            for (int32_t id = 1; id < glove.matrix.m; ++id) {
                anchors[prep.vocab.id_to_lemma[id]] = {glove.matrix.row(id),
                                                       glove.matrix.row(id) + glove.matrix.s};
            }
        }
        result = embed::train_mittens(cooc, prep.vocab, anchors, cfg);
        break;
    }
    }

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    const std::string vec_name = model + ".vec";
    const std::string loss_name = model + ".loss.csv";
    embed::save_vectors(result.matrix, prep.vocab, (dir / vec_name).string());
    save_loss_curve(result.epoch_loss, (dir / loss_name).string());

    std::map<std::string, std::string> inputs;
    for (const char* artifact : {"vocab.tsv", "tokens.csv"}) {
        const std::string path = (fs::path(prep_dir) / artifact).string();
        inputs[path] = hash_file(path);
    }
    if (anchors_path) inputs[*anchors_path] = hash_file(*anchors_path);
    write_manifest(out_dir, "train-embeddings " + model, cfg.seed, inputs,
                   {vec_name, loss_name});
}

TrainSingleResult cmd_train(const std::string& prep_dir, const std::string& vectors_path,
                            model::ModelConfig cfg, const train::TrainOptions& opts,
                            const std::string& out_dir) {
    const PrepData prep = load_prep(prep_dir);
    const embed::EmbeddingMatrix matrix = embed::load_vectors(prep.vocab, vectors_path);

    const train::Splits splits = train::stratified_split(prep.labels, train::SplitSpec{}, opts.seed);
    model::DanesModel model(cfg, &matrix, prep.tokens.k, prep.social_raw.f);
    const train::TrainOutcome outcome =
        train::train_model(model, prep.tokens,
                           cfg.social_branch_enabled ? &prep.social_raw : nullptr, prep.labels,
                           splits, opts);

    social::SocialMatrix social_std;
    if (outcome.scaler) social_std = social::transform(prep.social_raw, *outcome.scaler);
    train::RunResult run = train::evaluate(model, prep.tokens,
                                           outcome.scaler ? &social_std : nullptr, prep.labels,
                                           splits.test, opts.batch);
    run.runtime_seconds = outcome.runtime_seconds;
    run.epochs_ran = outcome.history.epochs_ran;
    run.stopped_early = outcome.history.stopped_early;
    run.seed = opts.seed;

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    model.save((dir / "model.ckpt").string());
    if (outcome.scaler) social::save_scaler(*outcome.scaler, (dir / "scaler.json").string());

    json doc;
    doc["accuracy"] = run.metrics.accuracy;
    doc["precision_weighted"] = run.metrics.precision_weighted;
    doc["recall_weighted"] = run.metrics.recall_weighted;
    doc["precision_macro"] = run.metrics.precision_macro;
    doc["recall_macro"] = run.metrics.recall_macro;
    doc["runtime_seconds"] = run.runtime_seconds;
    doc["epochs_ran"] = run.epochs_ran;
    doc["stopped_early"] = run.stopped_early;
    doc["best_epoch"] = outcome.history.best_epoch;
    doc["kernel_capped"] = model.kernel_capped();
    doc["seed"] = opts.seed;
    {
        std::ofstream out(dir / "result.json");
        if (!out) throw DataError("cannot write result.json in " + out_dir);
        out << doc.dump(2) << "\n";
    }

    std::map<std::string, std::string> inputs;
    inputs[vectors_path] = hash_file(vectors_path);
    write_manifest(out_dir, "train", opts.seed, inputs,
                   {"model.ckpt", "model.ckpt.json", "result.json"});

    TrainSingleResult result;
    result.run = run;
    result.kernel_capped = model.kernel_capped();
    return result;
}

bool cmd_ablate(const std::string& prep_dir, const std::vector<std::string>& vector_paths,
                const std::optional<std::string>& grid_path, train::AblationOptions opts,
                const std::string& out_dir) {
    if (vector_paths.empty()) throw DataError("ablate: no vector files given");
    const PrepData prep = load_prep(prep_dir);

    const auto [kernel_uni, kernel_bi] = default_kernels(prep.kind);
    if (opts.text_kernel_uni == 0) opts.text_kernel_uni = kernel_uni;
    if (opts.text_kernel_bi == 0) opts.text_kernel_bi = kernel_bi;

    std::vector<embed::EmbeddingMatrix> matrices;
    matrices.reserve(vector_paths.size());
    std::vector<train::EmbeddingInput> embeddings;
    for (const std::string& path : vector_paths) {
        matrices.push_back(embed::load_vectors(prep.vocab, path));
        embeddings.push_back({fs::path(path).stem().string(), nullptr});
    }
    for (size_t i = 0; i < matrices.size(); ++i) embeddings[i].matrix = &matrices[i];

    const train::AblationGrid grid = grid_path ? train::AblationGrid::from_json_file(*grid_path)
                                               : train::AblationGrid::default_grid();

    const train::AblationReport report =
        train::run_ablation(prep.tokens, prep.social_raw, prep.labels, embeddings, grid, opts);

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    train::emit_report_csv(report, (dir / "report.csv").string());
    train::emit_report_markdown(report, (dir / "report.md").string());
    train::save_runs_jsonl(report, (dir / "run.jsonl").string());

    std::map<std::string, std::string> inputs;
    for (const std::string& path : vector_paths) inputs[path] = hash_file(path);
    if (grid_path) inputs[*grid_path] = hash_file(*grid_path);
    write_manifest(out_dir, "ablate", opts.base_seed, inputs,
                   {"report.csv", "report.md", "run.jsonl"});

    for (const train::CellResult& cell : report.cells)
        if (!cell.error.empty()) return false;
    return true;
}

} // namespace danes::cli
