#include "visrank/reranker.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "nlohmann/json.hpp"
#include "visrank/util.hpp"

namespace visrank {

namespace {

using json = nlohmann::json;

bool uses_contexts(const Cascade& cascade) {
  for (RerankerKind kind : cascade.stages) {
    if (kind != RerankerKind::Ulm) return true;
  }
  return false;
}

void validate_config(const RerankConfig& config) {
  if (!(config.beta >= 0.0) || !(config.beta <= 1.0)) {
    throw std::invalid_argument("beta must be in [0, 1]");
  }
  if (config.max_contexts == 0) {
    throw std::invalid_argument("max contexts must be at least 1");
  }
}

double tdp_factor(std::string_view word, std::span<const VisualContext> contexts,
                  const TdpTable& tdp, const RerankConfig& config,
                  const std::optional<SelectedContext>& shared, StageScore* detail) {
  if (detail) detail->kind = RerankerKind::Tdp;
  std::optional<SelectedContext> selected;
  if (config.shared_context) {
    selected = shared;
  } else {
    // Conditional probability doubles as the relatedness measure; it is total,
    // so selection fails only when no context survives the threshold.
    selected = select_context(
        contexts,
        [&](const VisualContext& c) -> std::optional<double> { return tdp.prob(word, c.label); },
        config.beta, config.max_contexts);
  }
  if (detail) detail->context = selected;
  if (!selected.has_value()) {
    if (detail) detail->factor = 1.0;
    return 1.0;
  }
  double factor = tdp.prob(word, selected->label);
  if (detail) detail->factor = factor;
  return factor;
}

double twe_factor(std::string_view word, std::span<const VisualContext> contexts,
                  const TrainedEmbeddings& twe, const RerankConfig& config,
                  const std::optional<SelectedContext>& shared, StageScore* detail) {
  if (detail) detail->kind = RerankerKind::Twe;
  std::optional<SelectedContext> selected;
  if (config.shared_context) {
    if (shared.has_value()) {
      std::optional<double> sim = twe.similarity(word, shared->label, config.twe_input_input);
      if (sim.has_value()) {
        selected = *shared;
        selected->relatedness = *sim;
      }
    }
  } else {
    selected = select_context(
        contexts,
        [&](const VisualContext& c) {
          return twe.similarity(word, c.label, config.twe_input_input);
        },
        config.beta, config.max_contexts);
  }
  if (detail) detail->context = selected;
  if (!selected.has_value() || selected->confidence <= 0.0) {
    if (detail) {
      detail->factor = 1.0;
      detail->context.reset();
    }
    return 1.0;
  }
  double factor = twe_convert(selected->relatedness, selected->confidence);
  if (detail) detail->factor = factor;
  return factor;
}

}  // namespace

std::string_view reranker_name(RerankerKind kind) {
  switch (kind) {
    case RerankerKind::Ulm: return "ulm";
    case RerankerKind::Swe: return "swe";
    case RerankerKind::Tdp: return "tdp";
    case RerankerKind::Twe: return "twe";
  }
  return "unknown";
}

Cascade cascade_by_name(std::string_view name) {
  using K = RerankerKind;
  std::string lowered(name);
  for (char& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lowered == "p0") return Cascade{"p0", {}};
  if (lowered == "p1") return Cascade{"p1", {K::Ulm}};
  if (lowered == "p2") return Cascade{"p2", {K::Swe}};
  if (lowered == "p3") return Cascade{"p3", {K::Tdp}};
  if (lowered == "p4") return Cascade{"p4", {K::Twe}};
  if (lowered == "p5") return Cascade{"p5", {K::Swe, K::Tdp}};
  if (lowered == "p6") return Cascade{"p6", {K::Tdp, K::Twe}};
  if (lowered == "p7") return Cascade{"p7", {K::Swe, K::Tdp, K::Twe}};
  throw std::invalid_argument("unknown cascade '" + std::string(name) +
                              "', expected one of p0..p7");
}

std::vector<std::string> cascade_names() {
  return {"p0", "p1", "p2", "p3", "p4", "p5", "p6", "p7"};
}

void validate_models(const Cascade& cascade, const RerankModels& models) {
  std::vector<std::string> missing;
  for (RerankerKind kind : cascade.stages) {
    switch (kind) {
      case RerankerKind::Ulm:
        if (models.ulm == nullptr) missing.push_back("language model");
        break;
      case RerankerKind::Swe:
        if (models.ulm == nullptr) missing.push_back("language model");
        if (models.embeddings == nullptr) missing.push_back("embedding table");
        break;
      case RerankerKind::Tdp:
        if (models.tdp == nullptr) missing.push_back("conditional probability table");
        break;
      case RerankerKind::Twe:
        if (models.twe == nullptr) missing.push_back("trained pair embeddings");
        break;
    }
  }
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  if (!missing.empty()) {
    std::string what = "cascade " + cascade.name + " needs: ";
    for (std::size_t i = 0; i < missing.size(); ++i) {
      if (i > 0) what += ", ";
      what += missing[i];
    }
    throw std::invalid_argument(what);
  }
}

std::optional<SelectedContext> select_context(std::span<const VisualContext> contexts,
                                              const RelatednessFn& relatedness, double beta,
                                              std::size_t max_contexts) {
  if (!(beta >= 0.0) || !(beta <= 1.0)) throw std::invalid_argument("beta must be in [0, 1]");
  if (max_contexts == 0) throw std::invalid_argument("max contexts must be at least 1");

  struct Survivor {
    std::size_t index;
    const VisualContext* context;
  };
  std::vector<Survivor> survivors;
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    if (contexts[i].confidence >= beta) survivors.push_back(Survivor{i, &contexts[i]});
  }
  std::stable_sort(survivors.begin(), survivors.end(), [](const Survivor& a, const Survivor& b) {
    return a.context->confidence > b.context->confidence;
  });
  if (survivors.size() > max_contexts) survivors.resize(max_contexts);

  std::optional<SelectedContext> best;
  for (const Survivor& s : survivors) {
    std::optional<double> rel = relatedness(*s.context);
    if (!rel.has_value()) continue;
    if (!best.has_value() || *rel > best->relatedness) {
      best = SelectedContext{s.index, s.context->label, s.context->confidence, *rel};
    }
  }
  return best;
}

double swe_alpha(double sim, double context_prob) {
  return std::pow((1.0 - sim) / (1.0 + sim), 1.0 - context_prob);
}

double swe_fuse(double word_prob, double sim, double context_prob, bool clamp_negative) {
  if (sim > 1.0) sim = 1.0;
  if (sim < -1.0) sim = -1.0;
  if (clamp_negative && sim < 0.0) sim = 0.0;
  return std::pow(word_prob, swe_alpha(sim, context_prob));
}

double twe_convert(double sim, double context_prob) {
  return (std::tanh(sim) + 1.0) / (2.0 * context_prob);
}

double swe_score(std::string_view word, std::span<const VisualContext> contexts,
                 const UnigramModel& ulm, const EmbeddingTable& embeddings,
                 const RerankConfig& config, StageScore* detail) {
  if (detail) detail->kind = RerankerKind::Swe;
  double word_prob = ulm.prob(word);
  std::optional<SelectedContext> selected = select_context(
      contexts,
      [&](const VisualContext& c) { return embeddings.similarity(word, c.label); },
      config.beta, config.max_contexts);
  if (detail) detail->context = selected;
  if (!selected.has_value()) {
    // No usable visual evidence reduces the score to the word probability.
    if (detail) detail->factor = word_prob;
    return word_prob;
  }
  double factor =
      swe_fuse(word_prob, selected->relatedness, selected->confidence, config.clamp_negative_sim);
  if (detail) detail->factor = factor;
  return factor;
}

double twe_score(std::string_view word, std::span<const VisualContext> contexts,
                 const TrainedEmbeddings& twe, const RerankConfig& config, StageScore* detail) {
  RerankConfig own = config;
  own.shared_context = false;
  return twe_factor(word, contexts, twe, own, std::nullopt, detail);
}

std::vector<ScoredHypothesis> rerank_record(const EvalRecord& record, const Cascade& cascade,
                                            const RerankModels& models,
                                            const RerankConfig& config) {
  validate_config(config);
  validate_models(cascade, models);
  if (config.shared_context && uses_contexts(cascade) && models.embeddings == nullptr) {
    throw std::invalid_argument("shared context mode needs an embedding table");
  }

  std::vector<ScoredHypothesis> scored;
  scored.reserve(record.hypotheses.items.size());
  for (const Hypothesis& hyp : record.hypotheses.items) {
    ScoredHypothesis out;
    out.word = hyp.word;
    out.baseline = hyp.score;
    out.combined = hyp.score;

    std::optional<SelectedContext> shared;
    if (config.shared_context && uses_contexts(cascade)) {
      shared = select_context(
          record.contexts,
          [&](const VisualContext& c) { return models.embeddings->similarity(hyp.word, c.label); },
          config.beta, config.max_contexts);
    }

    for (RerankerKind kind : cascade.stages) {
      StageScore stage;
      switch (kind) {
        case RerankerKind::Ulm:
          stage.kind = RerankerKind::Ulm;
          stage.factor = models.ulm->prob(hyp.word);
          break;
        case RerankerKind::Swe:
          swe_score(hyp.word, record.contexts, *models.ulm, *models.embeddings, config, &stage);
          break;
        case RerankerKind::Tdp:
          tdp_factor(hyp.word, record.contexts, *models.tdp, config, shared, &stage);
          break;
        case RerankerKind::Twe:
          twe_factor(hyp.word, record.contexts, *models.twe, config, shared, &stage);
          break;
      }
      out.combined *= stage.factor;
      out.stages.push_back(std::move(stage));
    }
    scored.push_back(std::move(out));
  }

  std::stable_sort(scored.begin(), scored.end(),
                   [](const ScoredHypothesis& a, const ScoredHypothesis& b) {
                     if (a.combined != b.combined) return a.combined > b.combined;
                     return a.baseline > b.baseline;
                   });
  return scored;
}

std::string reranked_json(const EvalRecord& record, const Cascade& cascade,
                          std::span<const ScoredHypothesis> scored) {
  json reranked = json::array();
  json breakdown = json::array();
  for (const ScoredHypothesis& hyp : scored) {
    reranked.push_back(json{{"word", hyp.word}, {"score", hyp.combined}});
    json stages = json::array();
    for (const StageScore& stage : hyp.stages) {
      json entry{{"reranker", std::string(reranker_name(stage.kind))},
                 {"factor", stage.factor}};
      if (stage.context.has_value()) {
        entry["context"] = stage.context->label;
        entry["confidence"] = stage.context->confidence;
        entry["relatedness"] = stage.context->relatedness;
      }
      stages.push_back(std::move(entry));
    }
    breakdown.push_back(json{{"word", hyp.word}, {"baseline", hyp.baseline},
                             {"stages", std::move(stages)}});
  }
  json out{{"id", record.id},
           {"gold", record.gold},
           {"cascade", cascade.name},
           {"reranked", std::move(reranked)},
           {"breakdown", std::move(breakdown)}};
  return out.dump();
}

}  // namespace visrank
