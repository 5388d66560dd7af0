#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "visrank/dataset_io.hpp"
#include "visrank/embedding_store.hpp"

namespace visrank {

// Skip-gram with negative sampling over two-token sentences, one per
// annotated (word, context) pair. Both orientations of each pair are trained.
struct SkipGramConfig {
  std::size_t dim = 300;
  std::size_t window = 1;  // pair sentences admit no larger window
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;
  double lr_floor_ratio = 1e-4;  // lr never decays below learning_rate * this
  std::uint64_t seed = 1;
};

struct TrainingPair {
  std::string word;
  std::string context;
};

// One pair per context entry of each record, in record order.
std::vector<TrainingPair> pairs_from_records(std::span<const EvalRecord> records);

// One positive plus sampled negatives; gradients are written per slot,
// overwriting the buffers. Returns the loss
//   -log sigmoid(center . positive) - sum_n log sigmoid(-(center . neg_n)).
double sgns_loss_and_grad(std::size_t dim,
                          const double* center,
                          const double* positive,
                          const double* const* negatives, std::size_t n_negatives,
                          double* grad_center,
                          double* grad_positive,
                          double* const* grad_negatives);

struct SgnsExample {
  std::vector<double> center;
  std::vector<double> positive;
  std::vector<std::vector<double>> negatives;
};

struct SgnsGradients {
  std::vector<double> center;
  std::vector<double> positive;
  std::vector<std::vector<double>> negatives;
};

double sgns_loss_and_grad(const SgnsExample& example, SgnsGradients& gradients);
double sgns_loss(const SgnsExample& example);

// log(sigmoid(x)) computed without overflow for large |x|.
double log_sigmoid(double x);

// Word-side and context-side vectors for every token seen in training pairs.
// Per-epoch losses are kept on the trained object only; save/load persists
// just the two vector tables.
class TrainedEmbeddings {
 public:
  EmbeddingTable input;
  EmbeddingTable output;
  std::vector<double> epoch_losses;

  std::size_t dim() const noexcept { return input.dim(); }

  // Word from the input side against context from the output side; the
  // input_input switch compares input vectors on both sides instead.
  std::optional<double> similarity(std::string_view word, std::string_view context_label,
                                   bool input_input = false) const;

  void save(const std::string& prefix) const;  // writes prefix.in and prefix.out
  static TrainedEmbeddings load(const std::string& prefix);
};

// Deterministic serial training. Tokens found in init start from its vectors
// (dims must match); all others start from small seeded uniforms.
TrainedEmbeddings train_twe(std::span<const TrainingPair> pairs, const SkipGramConfig& config,
                            const EmbeddingTable* init = nullptr);

}  // namespace visrank
