#include "visrank/unigram_lm.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "visrank/dataset_io.hpp"
#include "visrank/version.hpp"

namespace visrank {

void UnigramCounts::add_token(std::string_view raw_token) {
  std::string token = normalize_token(raw_token);
  if (token.empty()) return;
  counts_[std::move(token)] += 1;
  total_ += 1;
}

void UnigramCounts::add_corpus(std::istream& corpus) {
  std::string token;
  while (corpus >> token) add_token(token);
}

void UnigramCounts::add_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  add_corpus(in);
}

void UnigramCounts::add_count(std::string_view normalized_token, std::uint64_t n) {
  if (n == 0) return;
  std::string token = normalize_token(normalized_token);
  if (token.empty()) return;
  counts_[std::move(token)] += n;
  total_ += n;
}

void UnigramCounts::merge(const UnigramCounts& other) {
  for (const auto& [token, n] : other.counts_) counts_[token] += n;
  total_ += other.total_;
}

UnigramModel UnigramModel::build(UnigramCounts counts, const LmOptions& options) {
  UnigramModel model;
  model.total_ = counts.total();
  model.counts_ = std::move(counts).take_counts();

  if (options.short_word_discount <= 0.0 || options.short_word_discount > 1.0)
    throw std::invalid_argument("short-word discount must be in (0,1]");
  model.discount_ = options.short_word_discount;

  if (options.oov_floor) {
    double floor = *options.oov_floor;
    if (!(floor > 0.0) || floor >= 1.0)
      throw std::invalid_argument("oov floor must be in (0,1)");
    if (!model.counts_.empty() && floor >= model.min_vocab_prob())
      throw std::invalid_argument("oov floor " + util::format_double(floor) +
                                  " not below the smallest vocabulary probability " +
                                  util::format_double(model.min_vocab_prob()));
    model.oov_floor_ = floor;
  } else {
    model.oov_floor_ =
        model.total_ > 0 ? 1.0 / (10.0 * static_cast<double>(model.total_)) : kEmptyModelFloor;
  }
  return model;
}

UnigramModel UnigramModel::build(std::istream& corpus, const LmOptions& options) {
  UnigramCounts counts;
  counts.add_corpus(corpus);
  return build(std::move(counts), options);
}

UnigramModel UnigramModel::build_from_files(const std::vector<std::string>& corpus_paths,
                                            const LmOptions& options) {
  UnigramCounts counts;
  for (const auto& path : corpus_paths) counts.add_corpus_file(path);
  return build(std::move(counts), options);
}

double UnigramModel::prob(std::string_view token) const {
  auto it = counts_.find(token);
  double p = it == counts_.end()
                 ? oov_floor_
                 : static_cast<double>(it->second) / static_cast<double>(total_);
  if (discount_ != 1.0) {
    for (std::size_t len = token.size(); len < 3; ++len) p *= discount_;
  }
  return p;
}

std::uint64_t UnigramModel::count(std::string_view token) const {
  auto it = counts_.find(token);
  return it == counts_.end() ? 0 : it->second;
}

double UnigramModel::min_vocab_prob() const {
  std::uint64_t min_count = std::numeric_limits<std::uint64_t>::max();
  for (const auto& [token, n] : counts_) min_count = std::min(min_count, n);
  if (counts_.empty() || total_ == 0) return 0.0;
  return static_cast<double>(min_count) / static_cast<double>(total_);
}

void UnigramModel::save(std::ostream& out) const {
  out << kUlmMagic << ' ' << total_ << ' ' << counts_.size() << ' '
      << util::format_double(oov_floor_);
  if (discount_ != 1.0) out << ' ' << util::format_double(discount_);
  out << '\n';
  std::vector<const std::string*> tokens;
  tokens.reserve(counts_.size());
  for (const auto& [token, n] : counts_) tokens.push_back(&token);
  std::sort(tokens.begin(), tokens.end(),
            [](const std::string* a, const std::string* b) { return *a < *b; });
  for (const std::string* token : tokens) out << *token << '\t' << counts_.find(*token)->second << '\n';
}

void UnigramModel::save_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
  save(out);
}

UnigramModel UnigramModel::load(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw FormatError("unigram model: empty stream");
  auto fields = util::split_whitespace(header);
  if (fields.empty() || fields[0] != kUlmMagic)
    throw FormatError("unigram model: bad magic, expected " + std::string(kUlmMagic));
  if (fields.size() != 4 && fields.size() != 5)
    throw FormatError("unigram model: malformed header");
  auto total = util::parse_u64(fields[1]);
  auto vocab = util::parse_u64(fields[2]);
  auto floor = util::parse_double(fields[3]);
  if (!total || !vocab || !floor) throw FormatError("unigram model: malformed header");
  double discount = 1.0;
  if (fields.size() == 5) {
    auto d = util::parse_double(fields[4]);
    if (!d) throw FormatError("unigram model: malformed header");
    discount = *d;
  }

  UnigramModel model;
  model.oov_floor_ = *floor;
  model.discount_ = discount;
  std::string line;
  std::uint64_t sum = 0;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw FormatError("unigram model: line " + std::to_string(line_number) + ": missing tab");
    auto n = util::parse_u64(std::string_view(line).substr(tab + 1));
    if (!n || *n == 0)
      throw FormatError("unigram model: line " + std::to_string(line_number) + ": bad count");
    auto [it, inserted] = model.counts_.emplace(line.substr(0, tab), *n);
    if (!inserted)
      throw FormatError("unigram model: line " + std::to_string(line_number) +
                        ": duplicate token \"" + it->first + "\"");
    sum += *n;
  }
  if (model.counts_.size() != *vocab)
    throw FormatError("unigram model: header vocab_size " + std::to_string(*vocab) +
                      " does not match " + std::to_string(model.counts_.size()) + " entries");
  if (sum != *total)
    throw FormatError("unigram model: header total " + std::to_string(*total) +
                      " does not match entry sum " + std::to_string(sum));
  model.total_ = sum;
  if (!(model.oov_floor_ > 0.0) ||
      (!model.counts_.empty() && model.oov_floor_ >= model.min_vocab_prob()))
    throw FormatError("unigram model: oov floor out of range");
  if (discount <= 0.0 || discount > 1.0)
    throw FormatError("unigram model: short-word discount out of range");
  return model;
}

UnigramModel UnigramModel::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  return load(in);
}

}  // namespace visrank
