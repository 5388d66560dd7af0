#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "visrank/dataset_io.hpp"
#include "visrank/embedding_store.hpp"
#include "visrank/eval.hpp"
#include "visrank/reranker.hpp"
#include "visrank/synthetic_bench.hpp"
#include "visrank/tdp.hpp"
#include "visrank/twe_trainer.hpp"
#include "visrank/unigram_lm.hpp"
#include "visrank/util.hpp"
#include "visrank/version.hpp"

namespace {

using namespace visrank;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Thrown for flag-level problems discovered after CLI11 parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string version_line() {
  return std::string("visrank ") + kVersion + " (formats: " + kUlmMagic + ", " + kTdpMagic + ")";
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  return out;
}

struct RerankArgs {
  std::string data_path;
  std::string cascade = "p1";
  std::string lm_path;
  std::string embeddings_path;
  std::string tdp_path;
  std::string twe_prefix;
  double beta = 0.05;
  std::size_t max_contexts = 5;
  std::string clamp_neg_sim = "on";
  std::string context_mode = "per-stage";
  bool twe_input_input = false;
  std::size_t jobs = 1;
  bool deterministic = false;
  std::string out_path;
};

// Flag requirements are checked before any file is touched.
void require_cascade_flags(const Cascade& cascade, const RerankArgs& args) {
  std::vector<std::string> missing;
  auto need = [&](bool present, const char* flag) {
    if (!present) missing.emplace_back(flag);
  };
  for (RerankerKind kind : cascade.stages) {
    switch (kind) {
      case RerankerKind::Ulm:
        need(!args.lm_path.empty(), "--lm");
        break;
      case RerankerKind::Swe:
        need(!args.lm_path.empty(), "--lm");
        need(!args.embeddings_path.empty(), "--embeddings");
        break;
      case RerankerKind::Tdp:
        need(!args.tdp_path.empty(), "--tdp");
        break;
      case RerankerKind::Twe:
        need(!args.twe_prefix.empty(), "--twe");
        break;
    }
  }
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  if (!missing.empty()) {
    std::string what = "cascade " + cascade.name + " requires ";
    for (std::size_t i = 0; i < missing.size(); ++i) {
      if (i > 0) what += ", ";
      what += missing[i];
    }
    throw UsageError(what);
  }
}

int run_build_lm(const std::vector<std::string>& corpora, const std::string& out_path,
                 const std::optional<double>& oov_floor, double discount) {
  LmOptions options;
  options.oov_floor = oov_floor;
  options.short_word_discount = discount;
  auto model = UnigramModel::build_from_files(corpora, options);
  model.save_file(out_path);
  std::cout << "built model: " << model.vocab_size() << " types, " << model.total()
            << " tokens, oov floor " << util::format_double(model.oov_floor()) << "\n";
  return kExitOk;
}

int run_similarity(const std::string& embeddings_path, const std::vector<std::string>& pair) {
  auto table = EmbeddingTable::load_file(embeddings_path);
  auto sim = table.similarity(normalize_token(pair[0]), normalize_token(pair[1]));
  if (sim.has_value()) {
    std::cout << util::format_double(*sim) << "\n";
  } else {
    std::cout << "absent\n";
  }
  return kExitOk;
}

int run_fit_tdp(const std::string& train_path, const std::string& out_path, double floor) {
  auto records = load_records(train_path);
  auto table = TdpTable::fit(records, floor);
  table.save_file(out_path);
  std::cout << "fitted table: " << table.pair_entries() << " pairs over "
            << table.context_entries() << " contexts from " << records.size() << " records\n";
  return kExitOk;
}

int run_train_twe(const std::string& train_path, const SkipGramConfig& config,
                  const std::string& init_path, const std::string& out_prefix) {
  auto records = load_records(train_path);
  auto pairs = pairs_from_records(records);
  std::cerr << "note: " << pairs.size() << " training pairs, seed " << config.seed << "\n";

  EmbeddingTable init;
  bool has_init = !init_path.empty();
  if (has_init) init = EmbeddingTable::load_file(init_path);
  auto trained = train_twe(pairs, config, has_init ? &init : nullptr);
  trained.save(out_prefix);
  std::cout << "trained " << trained.input.size() << " tokens, dim " << trained.dim();
  for (std::size_t e = 0; e < trained.epoch_losses.size(); ++e) {
    std::cout << (e == 0 ? "; epoch losses: " : ", ")
              << util::format_double(trained.epoch_losses[e]);
  }
  std::cout << "\n";
  return kExitOk;
}

int run_rerank(const RerankArgs& args) {
  Cascade cascade = cascade_by_name(args.cascade);
  require_cascade_flags(cascade, args);

  RerankConfig config;
  config.beta = args.beta;
  config.max_contexts = args.max_contexts;
  config.clamp_negative_sim = args.clamp_neg_sim == "on";
  config.shared_context = args.context_mode == "shared";
  config.twe_input_input = args.twe_input_input;
  if (config.shared_context && args.embeddings_path.empty()) {
    throw UsageError("--context-mode shared requires --embeddings");
  }

  UnigramModel lm;
  EmbeddingTable embeddings;
  TdpTable tdp;
  TrainedEmbeddings twe;
  RerankModels models;
  if (!args.lm_path.empty()) {
    lm = UnigramModel::load_file(args.lm_path);
    models.ulm = &lm;
  }
  if (!args.embeddings_path.empty()) {
    embeddings = EmbeddingTable::load_file(args.embeddings_path);
    models.embeddings = &embeddings;
  }
  if (!args.tdp_path.empty()) {
    tdp = TdpTable::load_file(args.tdp_path);
    models.tdp = &tdp;
  }
  if (!args.twe_prefix.empty()) {
    twe = TrainedEmbeddings::load(args.twe_prefix);
    models.twe = &twe;
  }

  ParseStats stats;
  auto records = load_records(args.data_path, &stats);

  std::size_t jobs = args.deterministic ? 1 : std::max<std::size_t>(1, args.jobs);
  std::vector<std::string> lines(records.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto scored = rerank_record(records[i], cascade, models, config);
      lines[i] = reranked_json(records[i], cascade, scored);
    }
  };
  if (jobs <= 1 || records.size() < 2) {
    work(0, records.size());
  } else {
    // Records are independent; slots keep the output in input order, so the
    // bytes match a serial run.
    std::size_t n_threads = std::min(jobs, records.size());
    std::vector<std::thread> threads;
    std::size_t chunk = (records.size() + n_threads - 1) / n_threads;
    for (std::size_t t = 0; t < n_threads; ++t) {
      std::size_t begin = t * chunk;
      std::size_t end = std::min(records.size(), begin + chunk);
      if (begin >= end) break;
      threads.emplace_back(work, begin, end);
    }
    for (auto& thread : threads) thread.join();
  }

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (args.out_path != "-") {
    file = open_output(args.out_path);
    out = &file;
  }
  for (const std::string& line : lines) *out << line << '\n';
  out->flush();
  if (!*out) throw std::runtime_error("failed writing output file: " + args.out_path);
  if (out == &file) {
    std::cout << "reranked " << records.size() << " records with cascade " << cascade.name
              << " -> " << args.out_path << "\n";
  }
  return kExitOk;
}

int run_evaluate(const std::string& data_path, const std::string& pred_path,
                 const std::string& lexicon_path, const std::string& k_list,
                 const std::string& label, const std::string& out_path) {
  std::vector<std::size_t> ks;
  for (std::string_view part : util::split(k_list, ',')) {
    auto k = util::parse_u64(part);
    if (!k.has_value() || *k == 0) {
      throw UsageError("--k expects a comma-separated list of positive integers");
    }
    ks.push_back(static_cast<std::size_t>(*k));
  }
  if (ks.empty()) throw UsageError("--k expects at least one cutoff");

  auto records = load_records(data_path);
  auto predictions = load_predictions_file(pred_path);
  StringSet lexicon;
  bool has_lexicon = !lexicon_path.empty();
  if (has_lexicon) {
    lexicon = load_lexicon_file(lexicon_path);
  } else {
    std::cerr << "note: no lexicon supplied, dictionary view skipped\n";
  }

  std::vector<EvalReport> reports;
  for (std::size_t k : ks) {
    reports.push_back(
        evaluate(records, predictions, k, has_lexicon ? &lexicon : nullptr, label));
  }
  std::cout << render_report_table(reports);
  if (!out_path.empty()) {
    auto out = open_output(out_path);
    write_report_tsv(out, reports);
  }
  return kExitOk;
}

int run_gen_bench(const BenchSpec& spec, const std::string& out_dir) {
  std::cerr << "note: seed " << spec.seed << "\n";
  generate_bench(spec, out_dir);
  std::cout << "wrote dataset.jsonl, train.jsonl, embeddings.vec, corpus.txt to " << out_dir
            << "\n";
  return kExitOk;
}

void selftest_check(bool ok, const std::string& what) {
  if (!ok) throw std::runtime_error("selftest: " + what);
}

int run_selftest() {
  // Hand-counted unigram probabilities.
  std::istringstream corpus("a b b a a");
  auto lm = UnigramModel::build(corpus);
  selftest_check(lm.prob("a") == 0.6, "unigram hand count");

  // Hand-computed cosine.
  EmbeddingTable table;
  std::vector<double> v{1.0, 2.0, 2.0};
  table.insert("w", v);
  v = {2.0, 1.0, 2.0};
  table.insert("c", v);
  auto sim = table.similarity("w", "c");
  selftest_check(sim.has_value() && std::fabs(*sim - 8.0 / 9.0) < 1e-12, "cosine hand value");

  // Hand-counted conditional probability.
  std::vector<EvalRecord> training;
  for (int i = 0; i < 4; ++i) {
    EvalRecord record;
    record.id = "t" + std::to_string(i);
    record.gold = i < 2 ? "way" : (i == 2 ? "stop" : "way");
    record.hypotheses.items.push_back(Hypothesis{record.gold, 1.0});
    record.contexts.push_back(VisualContext{i == 3 ? "sign" : "street", 0.5});
    training.push_back(std::move(record));
  }
  auto tdp = TdpTable::fit(training);
  selftest_check(std::fabs(tdp.prob("way", "street") - 2.0 / 3.0) < 1e-12,
                 "conditional probability hand count");

  // Loss at zero dot products.
  SgnsExample example;
  example.center = {1.0, 0.0};
  example.positive = {0.0, 1.0};
  example.negatives = {{0.0, 1.0}};
  selftest_check(std::fabs(sgns_loss(example) - 2.0 * std::log(2.0)) < 1e-12,
                 "pair loss hand value");

  // End-to-end on a generated fixture: fusion must not hurt, and reruns must
  // be byte-identical.
  BenchSpec spec;
  spec.n_records = 40;
  spec.train_records = 60;
  auto data = generate_bench_data(spec);
  std::istringstream bench_corpus(data.corpus_text);
  auto bench_lm = UnigramModel::build(bench_corpus);
  auto bench_tdp = TdpTable::fit(data.train_records);
  RerankModels models;
  models.ulm = &bench_lm;
  models.embeddings = &data.embeddings;
  models.tdp = &bench_tdp;

  std::vector<std::size_t> ks{3};
  auto p0 = sweep_k(data.eval_records, cascade_by_name("p0"), models, RerankConfig{}, ks);
  auto p2 = sweep_k(data.eval_records, cascade_by_name("p2"), models, RerankConfig{}, ks);
  auto p5 = sweep_k(data.eval_records, cascade_by_name("p5"), models, RerankConfig{}, ks);
  selftest_check(p2[0].full.correct >= p0[0].full.correct, "fusion not worse than baseline");
  selftest_check(p5[0].full.correct >= p2[0].full.correct, "combined not worse than fusion");

  auto rerun_bytes = [&] {
    std::string all;
    Cascade cascade = cascade_by_name("p5");
    for (const auto& record : data.eval_records) {
      all += reranked_json(record, cascade, rerank_record(record, cascade, models, RerankConfig{}));
      all += '\n';
    }
    return all;
  };
  selftest_check(rerun_bytes() == rerun_bytes(), "deterministic rerun");

  std::cout << "PASS\n";
  return kExitOk;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Re-ranks k-best word hypotheses using visual context evidence"};
  app.set_version_flag("--version", version_line());
  app.require_subcommand(1);

  auto* build_lm = app.add_subcommand("build-lm", "Count a corpus into a unigram model file");
  std::vector<std::string> corpora;
  std::string out_path;
  std::optional<double> oov_floor;
  double discount = 1.0;
  build_lm->add_option("--corpus", corpora, "Corpus file(s), whitespace tokenized")
      ->required()
      ->expected(-1);
  build_lm->add_option("--out", out_path, "Model file to write")->required();
  build_lm->add_option("--oov-floor", oov_floor,
                       "Probability for unseen tokens (default 1/(10*total))");
  build_lm->add_option("--short-word-discount", discount,
                       "Factor d applied as d^max(0,3-len), 1 disables");

  auto* similarity = app.add_subcommand("similarity", "Print the cosine of two stored tokens");
  std::string embeddings_path;
  std::vector<std::string> pair;
  similarity->add_option("--embeddings", embeddings_path, "Vector file")->required();
  similarity->add_option("--pair", pair, "Two tokens")->required()->expected(2);

  auto* fit_tdp = app.add_subcommand("fit-tdp", "Count gold-context pairs from a training set");
  std::string train_path;
  double tdp_floor = TdpTable::kDefaultFloor;
  fit_tdp->add_option("--train", train_path, "Training records, one JSON object per line")
      ->required();
  fit_tdp->add_option("--out", out_path, "Table file to write")->required();
  fit_tdp->add_option("--floor", tdp_floor, "Probability for unseen pairs");

  auto* train_twe_cmd = app.add_subcommand("train-twe", "Train pair embeddings on a training set");
  SkipGramConfig sg;
  std::string init_path;
  std::string out_prefix;
  train_twe_cmd->add_option("--train", train_path, "Training records")->required();
  train_twe_cmd->add_option("--dim", sg.dim, "Vector dimensionality");
  train_twe_cmd->add_option("--window", sg.window, "Context window (pairs admit only 1)");
  train_twe_cmd->add_option("--epochs", sg.epochs, "Training epochs");
  train_twe_cmd->add_option("--negatives", sg.negatives, "Negative samples per positive");
  train_twe_cmd->add_option("--lr", sg.learning_rate, "Initial learning rate");
  train_twe_cmd->add_option("--seed", sg.seed, "RNG seed");
  train_twe_cmd->add_option("--init", init_path, "Warm-start vector file");
  train_twe_cmd->add_option("--out", out_prefix, "Output prefix (.in/.out written)")->required();

  auto* rerank = app.add_subcommand("rerank", "Score and re-order every record's hypotheses");
  RerankArgs ra;
  rerank->add_option("--data", ra.data_path, "Records to rerank")->required();
  rerank->add_option("--cascade", ra.cascade, "One of p0..p7")->required();
  rerank->add_option("--lm", ra.lm_path, "Unigram model file");
  rerank->add_option("--embeddings", ra.embeddings_path, "General vector file");
  rerank->add_option("--tdp", ra.tdp_path, "Conditional probability table");
  rerank->add_option("--twe", ra.twe_prefix, "Trained pair-embedding prefix");
  rerank->add_option("--beta", ra.beta, "Context confidence threshold");
  rerank->add_option("--max-contexts", ra.max_contexts, "Surviving context cap");
  rerank->add_option("--clamp-neg-sim", ra.clamp_neg_sim, "on|off")
      ->check(CLI::IsMember({"on", "off"}));
  rerank->add_option("--context-mode", ra.context_mode, "per-stage|shared")
      ->check(CLI::IsMember({"per-stage", "shared"}));
  rerank->add_flag("--twe-input-input", ra.twe_input_input,
                   "Compare input vectors on both sides");
  rerank->add_option("--jobs", ra.jobs, "Worker threads");
  rerank->add_flag("--deterministic", ra.deterministic, "Force serial execution");
  rerank->add_option("--out", ra.out_path, "Output file, - for stdout")->required();

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions against gold words");
  std::string pred_path;
  std::string lexicon_path;
  std::string k_list = "1";
  std::string label;
  evaluate_cmd->add_option("--data", ra.data_path, "Records with gold words")->required();
  evaluate_cmd->add_option("--pred", pred_path, "Reranked output file")->required();
  evaluate_cmd->add_option("--lexicon", lexicon_path, "Token-per-line dictionary");
  evaluate_cmd->add_option("--k", k_list, "Comma-separated cutoffs, e.g. 2,3,5,9");
  evaluate_cmd->add_option("--label", label, "Row label for the report");
  evaluate_cmd->add_option("--out", out_path, "TSV report file");

  auto* gen_bench = app.add_subcommand("gen-bench", "Generate a synthetic planted-signal dataset");
  BenchSpec spec;
  std::string out_dir;
  gen_bench->add_option("--records", spec.n_records, "Evaluation records");
  gen_bench->add_option("--k", spec.k, "Hypotheses per record");
  gen_bench->add_option("--gold-top1", spec.gold_top1_rate, "Fraction with gold at rank 1");
  gen_bench->add_option("--strength", spec.correlation_strength, "Planted gold-context cosine");
  gen_bench->add_option("--seed", spec.seed, "RNG seed");
  gen_bench->add_option("--gold-vocab", spec.gold_vocab, "Distinct gold words");
  gen_bench->add_option("--distractor-vocab", spec.distractor_vocab, "Distinct distractors");
  gen_bench->add_option("--train-records", spec.train_records, "Training split size");
  gen_bench->add_option("--out", out_dir, "Output directory")->required();

  app.add_subcommand("selftest", "Run the bundled fixtures end-to-end");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (build_lm->parsed()) {
      if (oov_floor.has_value() && (*oov_floor <= 0.0 || *oov_floor >= 1.0)) {
        throw UsageError("--oov-floor must be in (0, 1)");
      }
      return run_build_lm(corpora, out_path, oov_floor, discount);
    }
    if (similarity->parsed()) return run_similarity(embeddings_path, pair);
    if (fit_tdp->parsed()) return run_fit_tdp(train_path, out_path, tdp_floor);
    if (train_twe_cmd->parsed()) return run_train_twe(train_path, sg, init_path, out_prefix);
    if (rerank->parsed()) return run_rerank(ra);
    if (evaluate_cmd->parsed()) {
      return run_evaluate(ra.data_path, pred_path, lexicon_path, k_list, label, out_path);
    }
    if (gen_bench->parsed()) return run_gen_bench(spec, out_dir);
    return run_selftest();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) { return dispatch(argc, argv); }
