// Command-line front end: corpus generation, training, prediction, scoring,
// cross-validation, and gradient checking. Exit codes: 0 ok, 1 usage error,
// 2 data error, 3 numeric error.
#include <cinttypes>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "segtopic/config.hpp"
#include "segtopic/corpus.hpp"
#include "segtopic/errors.hpp"
#include "segtopic/eval.hpp"
#include "segtopic/gradcheck.hpp"
#include "segtopic/labels.hpp"
#include "segtopic/model_io.hpp"
#include "segtopic/pipeline.hpp"

namespace {

using namespace segtopic;

std::string hex16(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void print_corpus_summary(const std::vector<Document>& docs) {
  std::size_t segments = 0, ood = 0;
  std::vector<std::size_t> histogram(kNumTopics, 0);
  for (const Document& d : docs) {
    for (const Segment& s : d.segments) {
      ++segments;
      if (s.is_ood()) ++ood;
      for (std::size_t label : s.labels) ++histogram[label];
    }
  }
  std::cout << "documents " << docs.size() << "\n";
  std::cout << "segments " << segments << "\n";
  std::cout << "label histogram:\n";
  for (std::size_t k = 0; k < kNumTopics; ++k) {
    std::cout << "  " << histogram[k] << "  " << kTopicNames[k] << "\n";
  }
  std::cout << "ood-fraction "
            << fixed(segments ? double(ood) / double(segments) : 0.0, 4) << "\n";
}

void cmd_gen_corpus(const std::string& spec_path, const std::string& out_path,
                    std::optional<std::uint64_t> seed, std::optional<std::size_t> ndocs) {
  CorpusSpec spec = load_corpus_spec(spec_path);
  if (seed) spec.seed = *seed;
  if (ndocs) spec.num_documents = *ndocs;
  const std::vector<Document> docs = generate_corpus(spec);
  write_corpus(docs, out_path);
  std::cout << "generated corpus (seed " << spec.seed << ") -> " << out_path << "\n";
  print_corpus_summary(docs);
}

struct TrainOverrides {
  std::optional<std::string> train, val, model_out, features_out, variant;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs, lsa_dim;
  std::optional<double> lambda, dropout;
  std::optional<int> window_left, window_right;
  std::optional<bool> music, gate;
};

RunConfig resolve_config(const std::string& config_path, const TrainOverrides& o) {
  RunConfig cfg = load_config(config_path);
  if (o.variant) cfg.variant = *o.variant;
  if (o.seed) cfg.seed = *o.seed;
  if (o.epochs) cfg.epochs = *o.epochs;
  if (o.lsa_dim) cfg.lsa_dim = *o.lsa_dim;
  if (o.lambda) cfg.svm_lambda = *o.lambda;
  if (o.dropout) cfg.dropout = *o.dropout;
  if (o.window_left) cfg.window_left = *o.window_left;
  if (o.window_right) cfg.window_right = *o.window_right;
  if (o.music) cfg.music = *o.music;
  if (o.gate) cfg.gate = *o.gate;
  if (o.train) cfg.train_corpus = *o.train;
  if (o.val) cfg.val_corpus = *o.val;
  if (o.model_out) cfg.model_file = *o.model_out;
  if (o.features_out) cfg.features_file = *o.features_out;
  cfg.validate();
  return cfg;
}

void cmd_train(const std::string& config_path, const TrainOverrides& o) {
  const RunConfig cfg = resolve_config(config_path, o);
  if (cfg.train_corpus.empty()) {
    throw UsageError("train: no training corpus (set train_corpus or pass --train)");
  }
  if (cfg.model_file.empty() || cfg.features_file.empty()) {
    throw UsageError(
        "train: model and feature output paths required (model_file/features_file "
        "or --model-out/--features-out)");
  }
  std::cout << "config-hash " << hex16(config_hash(cfg)) << " seed " << cfg.seed
            << " variant " << cfg.variant << " formats features=v1 model=v1\n";

  const std::vector<Document> train_docs = load_corpus(cfg.train_corpus);
  std::vector<Document> val_docs;
  const std::vector<Document>* valp = nullptr;
  if (!cfg.val_corpus.empty()) {
    val_docs = load_corpus(cfg.val_corpus);
    valp = &val_docs;
  }
  std::cout << "train-documents " << train_docs.size() << " train-segments "
            << count_segments(train_docs) << "\n";

  TrainLog log;
  const TrainedModel model = train_model(train_docs, valp, cfg, &log);
  for (const EpochStat& e : log.epochs) {
    std::cout << "epoch " << e.epoch << " train-loss " << fixed(e.train_loss, 6)
              << " val-metric " << fixed(e.val_metric, 6) << (e.selected ? " *" : "")
              << "\n";
  }
  save_features(model.features, cfg.features_file);
  save_model(model, cfg.model_file);
  std::cout << "feature-hash " << hex16(model.feature_hash) << "\n";
  std::cout << "wrote " << cfg.model_file << " and " << cfg.features_file << "\n";
}

void cmd_predict(const std::string& model_path, const std::string& features_path,
                 const std::string& corpus_path, const std::string& out_path) {
  const TrainedModel model = load_model(model_path, features_path);
  const std::vector<Document> corpus = load_corpus(corpus_path);
  const SystemOutput output = predict_model(model, corpus);
  write_system_output(output, out_path);
  std::cout << "config-hash " << hex16(config_hash(model.config)) << " variant "
            << model.config.variant << "\n";
  std::cout << "wrote " << output.size() << " records -> " << out_path << "\n";
}

void cmd_score(const std::string& output_path, const std::string& reference_path,
               const std::string& report_path, bool verbose) {
  const SystemOutput output = load_system_output(output_path);
  const std::vector<Document> reference = load_corpus(reference_path);
  const ScoreReport report = score_output(output, reference);
  std::cout << "segments " << report.num_segments << "\n";
  std::cout << "relevance-ap " << fixed3(report.relevance_ap) << "\n";
  std::cout << "type-ap " << fixed3(report.type_ap) << "\n";
  if (verbose) {
    std::cout << "relevance-ap-pessimistic " << fixed3(report.relevance_bounds.pessimistic)
              << "\n";
    std::cout << "relevance-ap-optimistic " << fixed3(report.relevance_bounds.optimistic)
              << "\n";
    std::cout << "type-prevalence " << fixed3(report.type_prevalence) << "\n";
  }
  if (!report_path.empty()) {
    write_report(report, report_path);
    std::cout << "wrote report -> " << report_path << "\n";
  }
}

void cmd_crossval(const std::string& config_path, const std::string& corpus_flag,
                  std::size_t k, std::optional<std::uint64_t> seed, bool by_segment,
                  bool parallel) {
  RunConfig cfg = load_config(config_path);
  if (!corpus_flag.empty()) cfg.train_corpus = corpus_flag;
  cfg.validate();
  if (cfg.train_corpus.empty()) {
    throw UsageError("crossval: no corpus (set train_corpus or pass --corpus)");
  }
  const std::uint64_t fold_seed = seed ? *seed : cfg.seed;
  std::cout << "config-hash " << hex16(config_hash(cfg)) << " seed " << fold_seed
            << " variant " << cfg.variant << " k " << k << " granularity "
            << (by_segment ? "segment" : "document") << "\n";
  const std::vector<Document> corpus = load_corpus(cfg.train_corpus);
  const CrossvalReport report =
      run_crossval(corpus, cfg, k, fold_seed, by_segment, parallel, &std::cerr);
  for (const FoldResult& f : report.folds) {
    if (f.skipped) {
      std::cout << "fold " << f.fold << " skipped (" << f.reason << ")\n";
    } else {
      std::cout << "fold " << f.fold << " test-docs " << f.test_docs << " relevance-ap "
                << fixed(f.relevance_ap, 4) << " type-ap " << fixed(f.type_ap, 4)
                << " prevalence " << fixed(f.type_prevalence, 4) << "\n";
    }
  }
  std::cout << "mean over " << report.valid_folds << " folds: relevance-ap "
            << fixed(report.mean_relevance_ap, 4) << " type-ap "
            << fixed(report.mean_type_ap, 4) << " prevalence "
            << fixed(report.mean_type_prevalence, 4) << "\n";
}

void cmd_gradcheck(const std::string& variant, std::uint64_t seed) {
  std::vector<std::string> variants;
  if (variant == "all") {
    variants = {"mlp", "bigru", "attn", "attn-gate"};
  } else {
    variants = {variant};
  }
  for (const std::string& v : variants) {
    const double err = run_model_gradcheck(v, seed);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6e", err);
    std::cout << "gradcheck " << v << " seed " << seed << " max-rel-err " << buf << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"segment-level topic identification toolkit"};
  app.require_subcommand(1);

  // gen-corpus
  std::string gc_spec, gc_out;
  std::optional<std::uint64_t> gc_seed;
  std::optional<std::size_t> gc_ndocs;
  CLI::App* gen = app.add_subcommand("gen-corpus", "generate a synthetic corpus from a spec");
  gen->add_option("--spec", gc_spec, "corpus spec file (json)")->required();
  gen->add_option("--out", gc_out, "output corpus path (jsonl)")->required();
  gen->add_option("--seed", gc_seed, "override the spec seed");
  gen->add_option("--num-documents", gc_ndocs, "override the document count");
  gen->callback([&] { cmd_gen_corpus(gc_spec, gc_out, gc_seed, gc_ndocs); });

  // train
  std::string tr_config;
  TrainOverrides tr;
  CLI::App* train = app.add_subcommand("train", "fit features and train a model");
  train->add_option("--config", tr_config, "run config file (json)")->required();
  train->add_option("--train", tr.train, "training corpus (overrides config)");
  train->add_option("--val", tr.val, "validation corpus (overrides config)");
  train->add_option("--model-out", tr.model_out, "model output path (overrides config)");
  train->add_option("--features-out", tr.features_out,
                    "feature-model output path (overrides config)");
  train->add_option("--variant", tr.variant, "svm | mlp | bigru | attn");
  train->add_option("--seed", tr.seed, "rng seed");
  train->add_option("--epochs", tr.epochs, "epoch count (0 = variant default)");
  train->add_option("--lsa-dim", tr.lsa_dim, "LSA dimension (0 = raw tf-idf)");
  train->add_option("--lambda", tr.lambda, "SVM regularization strength");
  train->add_option("--dropout", tr.dropout, "dropout rate");
  train->add_option("--window-left", tr.window_left, "attention left window (-1 unbounded)");
  train->add_option("--window-right", tr.window_right,
                    "attention right window (-1 unbounded)");
  train->add_flag("--music,!--no-music", tr.music, "append the music feature");
  train->add_flag("--gate,!--no-gate", tr.gate, "position-gated attention");
  train->callback([&] { cmd_train(tr_config, tr); });

  // predict
  std::string pr_model, pr_features, pr_corpus, pr_out;
  CLI::App* predict = app.add_subcommand("predict", "score a corpus with a trained model");
  predict->add_option("--model", pr_model, "model file")->required();
  predict->add_option("--features", pr_features, "feature-model file")->required();
  predict->add_option("--corpus", pr_corpus, "corpus to score (jsonl)")->required();
  predict->add_option("--out", pr_out, "system output path")->required();
  predict->callback([&] { cmd_predict(pr_model, pr_features, pr_corpus, pr_out); });

  // score
  std::string sc_output, sc_reference, sc_report;
  bool sc_verbose = false;
  CLI::App* score = app.add_subcommand("score", "two-layer scoring of a system output");
  score->add_option("--output", sc_output, "system output file")->required();
  score->add_option("--reference", sc_reference, "reference corpus (jsonl)")->required();
  score->add_option("--report", sc_report, "write the full report here");
  score->add_flag("--verbose", sc_verbose, "also print tie bounds and prevalence");
  score->callback([&] { cmd_score(sc_output, sc_reference, sc_report, sc_verbose); });

  // crossval
  std::string cv_config, cv_corpus;
  std::size_t cv_k = 10;
  std::optional<std::uint64_t> cv_seed;
  bool cv_by_segment = false, cv_parallel = false;
  CLI::App* crossval = app.add_subcommand("crossval", "k-fold cross-validation");
  crossval->add_option("--config", cv_config, "run config file (json)")->required();
  crossval->add_option("--corpus", cv_corpus, "corpus (overrides config train_corpus)");
  crossval->add_option("--k", cv_k, "fold count");
  crossval->add_option("--seed", cv_seed, "fold-assignment seed (default: config seed)");
  crossval->add_flag("--by-segment", cv_by_segment, "segment-granularity folds");
  crossval->add_flag("--parallel", cv_parallel, "run folds concurrently");
  crossval->callback(
      [&] { cmd_crossval(cv_config, cv_corpus, cv_k, cv_seed, cv_by_segment, cv_parallel); });

  // gradcheck
  std::string gk_variant = "all";
  std::uint64_t gk_seed = 0;
  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "finite-difference check of analytic gradients");
  gradcheck->add_option("--variant", gk_variant, "mlp | bigru | attn | attn-gate | all")
      ->check(CLI::IsMember({"mlp", "bigru", "attn", "attn-gate", "all"}));
  gradcheck->add_option("--seed", gk_seed, "rng seed");
  gradcheck->callback([&] { cmd_gradcheck(gk_variant, gk_seed); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const segtopic::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const segtopic::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const segtopic::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
