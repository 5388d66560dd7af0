#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "visrank/errors.hpp"
#include "visrank/util.hpp"

namespace visrank {

struct LmOptions {
  // Probability returned for out-of-vocabulary tokens. Defaults to
  // 1/(10*total), strictly below any seen unigram, so multiplicative
  // cascades stay positive.
  std::optional<double> oov_floor;
  // Factor d applied as d^max(0, 3-len(w)). 1.0 disables it. Useful when
  // over-frequent short words drown the visual signal.
  double short_word_discount = 1.0;
};

// Additive count accumulator. Shards can each fill one and be merged; the
// merge is order-independent.
class UnigramCounts {
 public:
  void add_token(std::string_view raw_token);
  void add_corpus(std::istream& corpus);
  void add_corpus_file(const std::string& path);
  void add_count(std::string_view normalized_token, std::uint64_t n);
  void merge(const UnigramCounts& other);

  std::uint64_t total() const noexcept { return total_; }
  const StringMap<std::uint64_t>& counts() const noexcept { return counts_; }
  StringMap<std::uint64_t> take_counts() && { return std::move(counts_); }

 private:
  StringMap<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

// Word-frequency model: prob(w) = count(w)/total for seen tokens, a small
// positive floor otherwise.
class UnigramModel {
 public:
  UnigramModel() = default;

  static UnigramModel build(UnigramCounts counts, const LmOptions& options = {});
  static UnigramModel build(std::istream& corpus, const LmOptions& options = {});
  static UnigramModel build_from_files(const std::vector<std::string>& corpus_paths,
                                       const LmOptions& options = {});

  // Expects a normalized token.
  double prob(std::string_view token) const;

  std::uint64_t count(std::string_view token) const;
  std::uint64_t total() const noexcept { return total_; }
  std::size_t vocab_size() const noexcept { return counts_.size(); }
  double oov_floor() const noexcept { return oov_floor_; }
  double short_word_discount() const noexcept { return discount_; }
  double min_vocab_prob() const;

  // Header "ULM1 <total> <vocab_size> <oov_floor>" then one "token\tcount"
  // line per type, sorted by token bytes. A fourth header field carries the
  // short-word discount when it is not 1.
  void save(std::ostream& out) const;
  void save_file(const std::string& path) const;
  static UnigramModel load(std::istream& in);
  static UnigramModel load_file(const std::string& path);

 private:
  StringMap<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
  double oov_floor_ = kEmptyModelFloor;
  double discount_ = 1.0;

 public:
  // Floor used when the vocabulary is empty and no explicit floor is given.
  static constexpr double kEmptyModelFloor = 1e-7;
};

}  // namespace visrank
