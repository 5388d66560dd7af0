#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "visrank/dataset_io.hpp"
#include "visrank/reranker.hpp"
#include "visrank/util.hpp"

namespace visrank {

struct ViewTally {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy() const noexcept {
    return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
  }
};

// Three accuracy views: full counts every record; dict restricts to records
// whose gold word is in the lexicon; list restricts to records whose gold
// appears in the baseline top-k.
struct EvalReport {
  std::string label;
  std::size_t k = 0;
  ViewTally full;
  ViewTally list;
  std::optional<ViewTally> dict;  // absent when no lexicon was supplied
};

struct Prediction {
  std::string id;
  std::vector<std::string> reranked;  // best first, normalized
};

// JSONL, one object per line: {"id": ..., "reranked": [...]} where entries
// are either bare strings or objects with a "word" key. Unknown keys are
// ignored; duplicate ids are an error.
std::vector<Prediction> load_predictions(std::istream& in);
std::vector<Prediction> load_predictions_file(const std::string& path);

// One token per line; tokens are normalized, blank lines skipped.
StringSet load_lexicon(std::istream& in);
StringSet load_lexicon_file(const std::string& path);

// The predicted word for a record is the first reranked entry found in the
// baseline top-k; a prediction is correct when it equals the gold word.
EvalReport evaluate(std::span<const EvalRecord> records, std::span<const Prediction> predictions,
                    std::size_t k, const StringSet* lexicon = nullptr,
                    const std::string& label = "");

// Reranks in memory at each cutoff, one report per (cascade fixed, k).
std::vector<EvalReport> sweep_k(std::span<const EvalRecord> records, const Cascade& cascade,
                                const RerankModels& models, const RerankConfig& config,
                                std::span<const std::size_t> ks,
                                const StringSet* lexicon = nullptr);

// Tab-separated rows, "-" in dict columns when no lexicon view exists.
void write_report_tsv(std::ostream& out, std::span<const EvalReport> reports);

// Aligned table for terminals.
std::string render_report_table(std::span<const EvalReport> reports);

}  // namespace visrank
