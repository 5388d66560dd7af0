#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "visrank/dataset_io.hpp"
#include "visrank/embedding_store.hpp"
#include "visrank/tdp.hpp"
#include "visrank/twe_trainer.hpp"
#include "visrank/unigram_lm.hpp"

namespace visrank {

enum class RerankerKind { Ulm, Swe, Tdp, Twe };

std::string_view reranker_name(RerankerKind kind);

// Named multiplicative stage sequences over the baseline score. p0 is the
// identity (baseline order preserved).
struct Cascade {
  std::string name;
  std::vector<RerankerKind> stages;
};

// Accepts p0..p7; throws std::invalid_argument otherwise.
Cascade cascade_by_name(std::string_view name);
std::vector<std::string> cascade_names();

struct RerankConfig {
  double beta = 0.05;            // context confidence threshold
  std::size_t max_contexts = 5;  // surviving contexts cap, highest confidence first
  bool clamp_negative_sim = true;
  bool shared_context = false;   // reuse the cosine-selected context for every stage
  bool twe_input_input = false;
};

// Non-owning; a stage's models must outlive the rerank call.
struct RerankModels {
  const UnigramModel* ulm = nullptr;
  const EmbeddingTable* embeddings = nullptr;
  const TdpTable* tdp = nullptr;
  const TrainedEmbeddings* twe = nullptr;
};

// Throws std::invalid_argument naming every model the cascade needs but the
// bundle lacks.
void validate_models(const Cascade& cascade, const RerankModels& models);

struct SelectedContext {
  std::size_t index = 0;  // position in the record's context list
  std::string label;
  double confidence = 0.0;
  double relatedness = 0.0;
};

using RelatednessFn = std::function<std::optional<double>(const VisualContext&)>;

// Among contexts with confidence >= beta (highest confidence first, at most
// max_contexts), the one maximizing relatedness; ties keep the higher
// confidence. Absent when nothing survives or no relatedness is defined.
std::optional<SelectedContext> select_context(std::span<const VisualContext> contexts,
                                              const RelatednessFn& relatedness, double beta,
                                              std::size_t max_contexts);

// alpha = ((1 - sim)/(1 + sim))^(1 - context_prob); sim already clamped.
double swe_alpha(double sim, double context_prob);

// word_prob^alpha. The upper clamp on sim is unconditional (cosine rounding
// can exceed 1); clamp_negative controls only the floor at 0.
double swe_fuse(double word_prob, double sim, double context_prob, bool clamp_negative);

// (tanh(sim) + 1) / (2 * context_prob); an unnormalized score that may
// exceed 1.
double twe_convert(double sim, double context_prob);

struct StageScore {
  RerankerKind kind = RerankerKind::Ulm;
  double factor = 1.0;
  std::optional<SelectedContext> context;  // absent when the fallback was used
};

struct ScoredHypothesis {
  std::string word;
  double baseline = 0.0;
  double combined = 0.0;
  std::vector<StageScore> stages;
};

// Hypothesis falls back to the word probability when no context informs it.
double swe_score(std::string_view word, std::span<const VisualContext> contexts,
                 const UnigramModel& ulm, const EmbeddingTable& embeddings,
                 const RerankConfig& config, StageScore* detail = nullptr);

// Neutral 1.0 when no context survives or the word is out of vocabulary.
double twe_score(std::string_view word, std::span<const VisualContext> contexts,
                 const TrainedEmbeddings& twe, const RerankConfig& config,
                 StageScore* detail = nullptr);

// Scores every hypothesis by the cascade and stable-sorts by combined score
// descending, ties by baseline then input order.
std::vector<ScoredHypothesis> rerank_record(const EvalRecord& record, const Cascade& cascade,
                                            const RerankModels& models,
                                            const RerankConfig& config);

// One JSON object per record: id, gold, cascade, reranked words with combined
// scores, and the per-stage breakdown.
std::string reranked_json(const EvalRecord& record, const Cascade& cascade,
                          std::span<const ScoredHypothesis> scored);

}  // namespace visrank
