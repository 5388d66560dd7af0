#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "visrank/dataset_io.hpp"
#include "visrank/embedding_store.hpp"

namespace visrank {

// Fixture generator with a planted signal: every gold word has a context
// whose embedding cosine is correlation_strength, distractors are orthogonal
// to every context and absent from the count corpus, and exactly
// round(gold_top1_rate * n_records) records carry gold at baseline rank 1.
struct BenchSpec {
  std::size_t n_records = 200;
  std::size_t k = 3;
  double gold_top1_rate = 0.4;
  double correlation_strength = 0.9;
  std::uint64_t seed = 7;
  std::size_t gold_vocab = 40;
  std::size_t distractor_vocab = 120;
  std::size_t train_records = 400;
};

struct BenchData {
  std::vector<EvalRecord> eval_records;
  std::vector<EvalRecord> train_records;
  EmbeddingTable embeddings;
  std::string corpus_text;
};

BenchData generate_bench_data(const BenchSpec& spec);

// Writes dataset.jsonl, train.jsonl, embeddings.vec, corpus.txt under
// out_dir, creating it if needed.
void generate_bench(const BenchSpec& spec, const std::string& out_dir);

}  // namespace visrank
