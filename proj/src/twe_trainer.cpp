#include "visrank/twe_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "visrank/util.hpp"

namespace visrank {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double dot(std::size_t dim, const double* a, const double* b) {
  double s = 0.0;
  for (std::size_t i = 0; i < dim; ++i) s += a[i] * b[i];
  return s;
}

// 53 uniform bits in [0, 1).
double next_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Cumulative count^(3/4) table over one role's tokens, in their first
// appearance order for that role.
class NoiseSampler {
 public:
  void add(std::uint32_t token_id, std::uint64_t count) {
    double weight = std::pow(static_cast<double>(count), 0.75);
    total_ += weight;
    ids_.push_back(token_id);
    cumulative_.push_back(total_);
  }

  std::uint32_t sample(double u) const {
    double target = u * total_;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    std::size_t idx = static_cast<std::size_t>(it - cumulative_.begin());
    if (idx >= ids_.size()) idx = ids_.size() - 1;
    return ids_[idx];
  }

  std::size_t size() const noexcept { return ids_.size(); }

 private:
  std::vector<std::uint32_t> ids_;
  std::vector<double> cumulative_;
  double total_ = 0.0;
};

void validate_config(const SkipGramConfig& config) {
  if (config.dim == 0) throw std::invalid_argument("dim must be positive");
  if (config.window != 1) {
    throw std::invalid_argument("window other than 1 is not supported for pair training");
  }
  if (!(config.learning_rate > 0.0)) {
    throw std::invalid_argument("learning rate must be positive");
  }
  if (!(config.lr_floor_ratio > 0.0) || config.lr_floor_ratio > 1.0) {
    throw std::invalid_argument("lr floor ratio must be in (0, 1]");
  }
}

}  // namespace

double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

std::vector<TrainingPair> pairs_from_records(std::span<const EvalRecord> records) {
  std::vector<TrainingPair> pairs;
  for (const EvalRecord& record : records) {
    for (const VisualContext& context : record.contexts) {
      pairs.push_back(TrainingPair{record.gold, context.label});
    }
  }
  return pairs;
}

double sgns_loss_and_grad(std::size_t dim,
                          const double* center,
                          const double* positive,
                          const double* const* negatives, std::size_t n_negatives,
                          double* grad_center,
                          double* grad_positive,
                          double* const* grad_negatives) {
  double pos_dot = dot(dim, center, positive);
  double loss = -log_sigmoid(pos_dot);
  // d/dx of -log sigmoid(x) is sigmoid(x) - 1.
  double pos_coeff = sigmoid(pos_dot) - 1.0;
  for (std::size_t i = 0; i < dim; ++i) {
    grad_center[i] = pos_coeff * positive[i];
    grad_positive[i] = pos_coeff * center[i];
  }
  for (std::size_t n = 0; n < n_negatives; ++n) {
    double neg_dot = dot(dim, center, negatives[n]);
    loss -= log_sigmoid(-neg_dot);
    double neg_coeff = sigmoid(neg_dot);
    for (std::size_t i = 0; i < dim; ++i) {
      grad_center[i] += neg_coeff * negatives[n][i];
      grad_negatives[n][i] = neg_coeff * center[i];
    }
  }
  return loss;
}

double sgns_loss_and_grad(const SgnsExample& example, SgnsGradients& gradients) {
  std::size_t dim = example.center.size();
  if (example.positive.size() != dim) {
    throw std::invalid_argument("positive vector dimension mismatch");
  }
  for (const std::vector<double>& neg : example.negatives) {
    if (neg.size() != dim) throw std::invalid_argument("negative vector dimension mismatch");
  }
  gradients.center.assign(dim, 0.0);
  gradients.positive.assign(dim, 0.0);
  gradients.negatives.assign(example.negatives.size(), std::vector<double>(dim, 0.0));

  std::vector<const double*> neg_ptrs;
  std::vector<double*> grad_neg_ptrs;
  for (std::size_t n = 0; n < example.negatives.size(); ++n) {
    neg_ptrs.push_back(example.negatives[n].data());
    grad_neg_ptrs.push_back(gradients.negatives[n].data());
  }
  return sgns_loss_and_grad(dim, example.center.data(), example.positive.data(),
                            neg_ptrs.data(), neg_ptrs.size(), gradients.center.data(),
                            gradients.positive.data(), grad_neg_ptrs.data());
}

double sgns_loss(const SgnsExample& example) {
  std::size_t dim = example.center.size();
  double pos_dot = dot(dim, example.center.data(), example.positive.data());
  double loss = -log_sigmoid(pos_dot);
  for (const std::vector<double>& neg : example.negatives) {
    loss -= log_sigmoid(-dot(dim, example.center.data(), neg.data()));
  }
  return loss;
}

std::optional<double> TrainedEmbeddings::similarity(std::string_view word,
                                                   std::string_view context_label,
                                                   bool input_input) const {
  std::span<const double> wv = input.find(word);
  if (wv.empty()) return std::nullopt;
  const EmbeddingTable& context_side = input_input ? input : output;
  std::optional<std::vector<double>> cv = context_side.vector_for(context_label);
  if (!cv.has_value()) return std::nullopt;
  return EmbeddingTable::cosine(wv, *cv);
}

void TrainedEmbeddings::save(const std::string& prefix) const {
  input.save_file(prefix + ".in");
  output.save_file(prefix + ".out");
}

TrainedEmbeddings TrainedEmbeddings::load(const std::string& prefix) {
  TrainedEmbeddings trained;
  trained.input = EmbeddingTable::load_file(prefix + ".in");
  trained.output = EmbeddingTable::load_file(prefix + ".out");
  if (trained.input.dim() != trained.output.dim()) {
    throw FormatError("input and output vector files disagree on dimension");
  }
  return trained;
}

TrainedEmbeddings train_twe(std::span<const TrainingPair> pairs, const SkipGramConfig& config,
                            const EmbeddingTable* init) {
  validate_config(config);
  if (pairs.empty()) throw std::invalid_argument("training pairs are empty");
  if (init != nullptr && init->dim() != config.dim) {
    throw std::invalid_argument("init table dimension " + std::to_string(init->dim()) +
                                " does not match configured dim " + std::to_string(config.dim));
  }
  for (const TrainingPair& pair : pairs) {
    if (pair.word.empty() || pair.context.empty()) {
      throw std::invalid_argument("training pair with empty token");
    }
  }

  // Vocabulary ids in first appearance order, word then context per pair.
  StringMap<std::uint32_t> vocab;
  std::vector<std::string> tokens;
  auto intern = [&](const std::string& token) -> std::uint32_t {
    auto it = vocab.find(token);
    if (it != vocab.end()) return it->second;
    std::uint32_t id = static_cast<std::uint32_t>(tokens.size());
    vocab.emplace(token, id);
    tokens.push_back(token);
    return id;
  };

  struct IdPair {
    std::uint32_t word;
    std::uint32_t context;
  };
  std::vector<IdPair> id_pairs;
  id_pairs.reserve(pairs.size());
  std::vector<std::uint64_t> word_role_counts;     // by token id
  std::vector<std::uint64_t> context_role_counts;  // by token id
  std::vector<std::uint32_t> word_role_order;      // first appearance in the word role
  std::vector<std::uint32_t> context_role_order;
  for (const TrainingPair& pair : pairs) {
    std::uint32_t w = intern(pair.word);
    std::uint32_t c = intern(pair.context);
    id_pairs.push_back(IdPair{w, c});
    word_role_counts.resize(tokens.size(), 0);
    context_role_counts.resize(tokens.size(), 0);
    if (word_role_counts[w]++ == 0) word_role_order.push_back(w);
    if (context_role_counts[c]++ == 0) context_role_order.push_back(c);
  }

  NoiseSampler word_noise;
  for (std::uint32_t id : word_role_order) word_noise.add(id, word_role_counts[id]);
  NoiseSampler context_noise;
  for (std::uint32_t id : context_role_order) context_noise.add(id, context_role_counts[id]);

  std::size_t dim = config.dim;
  std::size_t n_tokens = tokens.size();
  std::mt19937_64 rng(config.seed);
  double init_scale = 0.5 / static_cast<double>(dim);

  // Input rows copy init vectors where available; everything else starts from
  // small uniforms so no row has zero magnitude.
  std::vector<double> input_data(n_tokens * dim);
  for (std::size_t t = 0; t < n_tokens; ++t) {
    std::span<const double> from_init =
        init != nullptr ? init->find(tokens[t]) : std::span<const double>{};
    if (!from_init.empty()) {
      std::copy(from_init.begin(), from_init.end(), input_data.begin() + t * dim);
    } else {
      for (std::size_t i = 0; i < dim; ++i) {
        input_data[t * dim + i] = (next_uniform(rng) - 0.5) * 2.0 * init_scale;
      }
    }
  }
  std::vector<double> output_data(n_tokens * dim);
  for (double& x : output_data) x = (next_uniform(rng) - 0.5) * 2.0 * init_scale;

  std::vector<double> grad_center(dim);
  std::vector<double> grad_positive(dim);
  std::vector<double> grad_neg_data(config.negatives * dim);
  std::vector<double*> grad_neg_ptrs(config.negatives);
  std::vector<const double*> neg_ptrs(config.negatives);
  std::vector<std::uint32_t> neg_ids(config.negatives);

  double lr0 = config.learning_rate;
  double lr_floor = lr0 * config.lr_floor_ratio;
  std::size_t total_steps = config.epochs * id_pairs.size();
  std::size_t step = 0;

  auto train_direction = [&](std::uint32_t center_id, std::uint32_t positive_id,
                             const NoiseSampler& noise, double lr) -> double {
    double* center = input_data.data() + static_cast<std::size_t>(center_id) * dim;
    double* positive = output_data.data() + static_cast<std::size_t>(positive_id) * dim;
    std::size_t n_neg = 0;
    for (std::size_t n = 0; n < config.negatives; ++n) {
      std::uint32_t id = noise.sample(next_uniform(rng));
      if (id == positive_id) continue;  // drawn slot is dropped, not redrawn
      neg_ids[n_neg] = id;
      neg_ptrs[n_neg] = output_data.data() + static_cast<std::size_t>(id) * dim;
      grad_neg_ptrs[n_neg] = grad_neg_data.data() + n_neg * dim;
      ++n_neg;
    }
    double loss = sgns_loss_and_grad(dim, center, positive, neg_ptrs.data(), n_neg,
                                     grad_center.data(), grad_positive.data(),
                                     grad_neg_ptrs.data());
    for (std::size_t i = 0; i < dim; ++i) center[i] -= lr * grad_center[i];
    for (std::size_t i = 0; i < dim; ++i) positive[i] -= lr * grad_positive[i];
    for (std::size_t n = 0; n < n_neg; ++n) {
      double* row = output_data.data() + static_cast<std::size_t>(neg_ids[n]) * dim;
      for (std::size_t i = 0; i < dim; ++i) row[i] -= lr * grad_neg_ptrs[n][i];
    }
    return loss;
  };

  TrainedEmbeddings trained;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (const IdPair& pair : id_pairs) {
      double lr = std::max(lr0 * (1.0 - static_cast<double>(step) /
                                            static_cast<double>(total_steps)),
                           lr_floor);
      epoch_loss += train_direction(pair.word, pair.context, context_noise, lr);
      epoch_loss += train_direction(pair.context, pair.word, word_noise, lr);
      ++step;
    }
    if (!std::isfinite(epoch_loss)) {
      throw std::runtime_error("training diverged at epoch " + std::to_string(epoch) +
                               ", lower the learning rate");
    }
    trained.epoch_losses.push_back(epoch_loss);
  }

  for (std::size_t t = 0; t < n_tokens; ++t) {
    trained.input.insert(tokens[t], std::span<const double>(input_data.data() + t * dim, dim));
    trained.output.insert(tokens[t], std::span<const double>(output_data.data() + t * dim, dim));
  }
  return trained;
}

}  // namespace visrank
