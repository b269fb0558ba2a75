#include "danes/cli.hpp"
#include "danes/common.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace danes;

int main(int argc, char** argv) {
    CLI::App app{"danes: two-branch text + social-context fake news classifier"};
    app.require_subcommand(1);

    // preprocess -----------------------------------------------------------
    auto* prep = app.add_subcommand("preprocess", "tokenize a JSONL dataset into training artifacts");
    std::string prep_input, prep_kind, prep_out;
    prep->add_option("--input", prep_input, "JSONL dataset file")->required();
    prep->add_option("--kind", prep_kind, "dataset kind: buzzface|twitter15|twitter16")
        ->required()
        ->check(CLI::IsMember({"buzzface", "twitter15", "twitter16"}));
    prep->add_option("--out", prep_out, "output directory")->required();

    // train-embeddings -------------------------------------------------------
    auto* emb = app.add_subcommand("train-embeddings", "train one word-embedding model");
    std::string emb_prep, emb_model, emb_out, emb_anchors;
    embed::EmbedConfig emb_cfg;
    emb->add_option("--prep", emb_prep, "preprocess output directory")->required();
    emb->add_option("--model", emb_model, "w2v-cbow|w2v-sg|ft-cbow|ft-sg|glove|mittens")
        ->required()
        ->check(CLI::IsMember({"w2v-cbow", "w2v-sg", "ft-cbow", "ft-sg", "glove", "mittens"}));
    emb->add_option("--out", emb_out, "output directory")->required();
    emb->add_option("--window", emb_cfg.window, "context window radius");
    emb->add_option("--dim", emb_cfg.dim, "embedding components");
    emb->add_option("--epochs", emb_cfg.epochs, "training epochs");
    emb->add_option("--lr", emb_cfg.learning_rate, "learning rate");
    emb->add_option("--negatives", emb_cfg.negatives, "negative samples");
    emb->add_option("--min-ngram", emb_cfg.min_ngram, "FastText min n-gram");
    emb->add_option("--max-ngram", emb_cfg.max_ngram, "FastText max n-gram");
    emb->add_option("--x-max", emb_cfg.x_max, "GloVe weighting cutoff");
    emb->add_option("--alpha", emb_cfg.alpha, "GloVe weighting exponent");
    emb->add_option("--mu", emb_cfg.mittens_mu, "Mittens anchor penalty");
    emb->add_option("--anchors", emb_anchors, "anchor vector file for Mittens");
    emb->add_option("--seed", emb_cfg.seed, "RNG seed");

    // train ------------------------------------------------------------------
    auto* tr = app.add_subcommand("train", "train and evaluate one model configuration");
    std::string tr_prep, tr_vectors, tr_out, tr_cell = "gru", tr_seq_mode = "per_feature";
    model::ModelConfig tr_cfg;
    train::TrainOptions tr_opts;
    bool tr_bi = false, tr_text_cnn = false, tr_social_cnn = false, tr_no_social = false;
    tr->add_option("--prep", tr_prep, "preprocess output directory")->required();
    tr->add_option("--vectors", tr_vectors, "embedding vector file")->required();
    tr->add_option("--out", tr_out, "output directory")->required();
    tr->add_option("--cell", tr_cell, "gru|lstm")->check(CLI::IsMember({"gru", "lstm"}));
    tr->add_flag("--bi", tr_bi, "bidirectional RNN layers");
    tr->add_flag("--text-cnn", tr_text_cnn, "CNN + max pooling on the text branch");
    tr->add_flag("--social-cnn", tr_social_cnn, "CNN + max pooling on the social branch");
    tr->add_flag("--no-social", tr_no_social, "disable the social branch (text-only baseline)");
    tr->add_option("--units", tr_cfg.rnn_units, "RNN units per direction");
    tr->add_option("--text-kernel", tr_cfg.text_kernel, "text CNN kernel size");
    tr->add_option("--social-kernel", tr_cfg.social_kernel, "social CNN kernel size");
    tr->add_option("--filters", tr_cfg.conv_filters, "CNN filters");
    tr->add_option("--dropout-ff", tr_cfg.dropout_ff, "feed-forward dropout rate");
    tr->add_option("--dropout-rec", tr_cfg.dropout_rec, "recurrent dropout rate");
    tr->add_option("--social-sequence-mode", tr_seq_mode, "per_feature|single_step");
    tr->add_option("--epochs", tr_opts.epochs_max, "max training epochs");
    tr->add_option("--patience", tr_opts.patience, "early stopping patience");
    tr->add_option("--batch", tr_opts.batch, "mini-batch size");
    tr->add_option("--seed", tr_opts.seed, "RNG seed");

    // ablate ------------------------------------------------------------------
    auto* ab = app.add_subcommand("ablate", "run the full ablation grid");
    std::string ab_prep, ab_out, ab_grid;
    std::vector<std::string> ab_vectors;
    train::AblationOptions ab_opts;
    ab_opts.text_kernel_uni = 0; // 0 = dataset-kind default
    ab_opts.text_kernel_bi = 0;
    ab->add_option("--prep", ab_prep, "preprocess output directory")->required();
    ab->add_option("--vectors", ab_vectors, "embedding vector files (repeatable)")
        ->required()
        ->expected(-1);
    ab->add_option("--out", ab_out, "output directory")->required();
    ab->add_option("--grid", ab_grid, "grid JSON file (default: the full 6x2x2 grid)");
    ab->add_option("--runs", ab_opts.runs, "independent runs per cell");
    ab->add_option("--seed", ab_opts.base_seed, "base seed; run i uses seed base+i");
    ab->add_option("--workers", ab_opts.workers, "parallel workers across runs");
    ab->add_option("--units", ab_opts.rnn_units, "RNN units per direction");
    ab->add_option("--text-kernel", ab_opts.text_kernel_uni, "uni text kernel override");
    ab->add_option("--text-kernel-bi", ab_opts.text_kernel_bi, "bi text kernel override");
    ab->add_option("--epochs", ab_opts.train.epochs_max, "max training epochs");
    ab->add_option("--patience", ab_opts.train.patience, "early stopping patience");
    ab->add_option("--batch", ab_opts.train.batch, "mini-batch size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 1;
    }

    try {
        if (prep->parsed()) {
            const cli::PreprocessSummary s = cli::cmd_preprocess(prep_input, prep_kind, prep_out);
            std::cout << "n=" << s.n << " k=" << s.k << " vocab=" << s.vocab_size
                      << " f=" << s.f << " ignored_keys=" << s.ignored_keys << "\n";
        } else if (emb->parsed()) {
            cli::cmd_train_embeddings(
                emb_prep, emb_model, emb_cfg,
                emb_anchors.empty() ? std::nullopt : std::optional<std::string>(emb_anchors),
                emb_out);
            std::cout << "wrote " << emb_out << "/" << emb_model << ".vec\n";
        } else if (tr->parsed()) {
            tr_cfg.cell = tensor::parse_cell(tr_cell);
            tr_cfg.bidirectional = tr_bi;
            tr_cfg.text_cnn = tr_text_cnn;
            tr_cfg.social_cnn = tr_social_cnn;
            tr_cfg.social_branch_enabled = !tr_no_social;
            tr_cfg.social_sequence_mode = tr_seq_mode == "single_step"
                                              ? model::SocialSequenceMode::SingleStep
                                              : model::SocialSequenceMode::PerFeature;
            tr_cfg.seed = tr_opts.seed;
            const cli::TrainSingleResult r = cli::cmd_train(tr_prep, tr_vectors, tr_cfg, tr_opts, tr_out);
            std::cout << "accuracy=" << r.run.metrics.accuracy
                      << " precision=" << r.run.metrics.precision_weighted
                      << " recall=" << r.run.metrics.recall_weighted
                      << " epochs=" << r.run.epochs_ran
                      << (r.kernel_capped ? " (kernel capped to sequence length)" : "") << "\n";
        } else if (ab->parsed()) {
            const bool ok = cli::cmd_ablate(
                ab_prep, ab_vectors,
                ab_grid.empty() ? std::nullopt : std::optional<std::string>(ab_grid), ab_opts,
                ab_out);
            std::cout << "wrote " << ab_out << "/report.csv\n";
            if (!ok) {
                std::cerr << "some cells failed; see the error column in report.csv\n";
                return 3;
            }
        }
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
