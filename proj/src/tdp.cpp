#include "visrank/tdp.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "visrank/version.hpp"

namespace visrank {

namespace {

[[noreturn]] void fail_format(std::size_t line_number, const std::string& what) {
  throw FormatError("line " + std::to_string(line_number) + ": " + what);
}

void require_clean_token(std::string_view token, const char* role) {
  if (token.empty()) {
    throw std::invalid_argument(std::string(role) + " token is empty");
  }
  if (token.find('\t') != std::string_view::npos || token.find('\n') != std::string_view::npos) {
    throw std::invalid_argument(std::string(role) + " token contains tab or newline: " +
                                std::string(token));
  }
}

}  // namespace

void TdpTable::validate_floor(double floor) {
  if (!(floor > 0.0) || !(floor < 1.0)) {
    throw std::invalid_argument("pair floor must be in (0, 1), got " + util::format_double(floor));
  }
}

TdpTable TdpTable::fit(std::span<const EvalRecord> training, double floor) {
  validate_floor(floor);
  TdpTable table;
  table.floor_ = floor;
  std::vector<std::string_view> seen;
  for (const EvalRecord& record : training) {
    // A context repeated within one record still counts once.
    seen.clear();
    for (const VisualContext& context : record.contexts) {
      if (std::find(seen.begin(), seen.end(), std::string_view(context.label)) != seen.end()) {
        continue;
      }
      seen.push_back(context.label);
      auto word_it = table.pair_counts_.find(record.gold);
      if (word_it == table.pair_counts_.end()) {
        word_it = table.pair_counts_.emplace(record.gold, StringMap<std::uint64_t>{}).first;
      }
      auto ctx_it = word_it->second.find(context.label);
      if (ctx_it == word_it->second.end()) {
        word_it->second.emplace(context.label, 1);
      } else {
        ++ctx_it->second;
      }
      auto count_it = table.context_counts_.find(context.label);
      if (count_it == table.context_counts_.end()) {
        table.context_counts_.emplace(context.label, 1);
      } else {
        ++count_it->second;
      }
    }
  }
  return table;
}

double TdpTable::prob(std::string_view word, std::string_view context_label) const {
  std::uint64_t pair = pair_count(word, context_label);
  if (pair == 0) return floor_;
  std::uint64_t marginal = context_count(context_label);
  return static_cast<double>(pair) / static_cast<double>(marginal);
}

std::uint64_t TdpTable::pair_count(std::string_view word, std::string_view context_label) const {
  auto word_it = pair_counts_.find(word);
  if (word_it == pair_counts_.end()) return 0;
  auto ctx_it = word_it->second.find(context_label);
  if (ctx_it == word_it->second.end()) return 0;
  return ctx_it->second;
}

std::uint64_t TdpTable::context_count(std::string_view context_label) const {
  auto it = context_counts_.find(context_label);
  if (it == context_counts_.end()) return 0;
  return it->second;
}

std::size_t TdpTable::pair_entries() const noexcept {
  std::size_t n = 0;
  for (const auto& [word, contexts] : pair_counts_) n += contexts.size();
  return n;
}

void TdpTable::save(std::ostream& out) const {
  out << kTdpMagic << ' ' << util::format_double(floor_) << '\n';

  struct PairRow {
    const std::string* word;
    const std::string* context;
    std::uint64_t count;
  };
  std::vector<PairRow> pairs;
  pairs.reserve(pair_entries());
  for (const auto& [word, contexts] : pair_counts_) {
    require_clean_token(word, "word");
    for (const auto& [context, count] : contexts) {
      pairs.push_back(PairRow{&word, &context, count});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const PairRow& a, const PairRow& b) {
    if (*a.word != *b.word) return *a.word < *b.word;
    return *a.context < *b.context;
  });
  for (const PairRow& row : pairs) {
    out << *row.word << '\t' << *row.context << '\t' << row.count << '\n';
  }

  out << "#contexts\n";
  std::vector<const std::string*> contexts;
  contexts.reserve(context_counts_.size());
  for (const auto& [context, count] : context_counts_) {
    require_clean_token(context, "context");
    contexts.push_back(&context);
  }
  std::sort(contexts.begin(), contexts.end(),
            [](const std::string* a, const std::string* b) { return *a < *b; });
  for (const std::string* context : contexts) {
    out << *context << '\t' << context_counts_.find(*context)->second << '\n';
  }
}

void TdpTable::save_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open table file for writing: " + path);
  save(out);
  out.flush();
  if (!out) throw std::runtime_error("failed writing table file: " + path);
}

TdpTable TdpTable::load(std::istream& in) {
  TdpTable table;
  std::string line;
  std::size_t line_number = 0;

  if (!std::getline(in, line)) throw FormatError("empty table file");
  ++line_number;
  std::vector<std::string_view> header = util::split_whitespace(line);
  if (header.size() != 2 || header[0] != kTdpMagic) {
    fail_format(line_number, "expected header '" + std::string(kTdpMagic) + " <floor>'");
  }
  std::optional<double> floor = util::parse_double(header[1]);
  if (!floor.has_value()) fail_format(line_number, "floor is not a number");
  validate_floor(*floor);
  table.floor_ = *floor;

  bool in_contexts = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    if (line == "#contexts") {
      if (in_contexts) fail_format(line_number, "repeated #contexts marker");
      in_contexts = true;
      continue;
    }
    std::vector<std::string_view> fields = util::split(line, '\t');
    if (!in_contexts) {
      if (fields.size() != 3) fail_format(line_number, "expected word<TAB>context<TAB>count");
      std::optional<std::uint64_t> count = util::parse_u64(fields[2]);
      if (!count.has_value() || *count == 0) {
        fail_format(line_number, "pair count must be a positive integer");
      }
      auto word_it = table.pair_counts_.find(fields[0]);
      if (word_it == table.pair_counts_.end()) {
        word_it = table.pair_counts_.emplace(std::string(fields[0]),
                                             StringMap<std::uint64_t>{}).first;
      }
      if (!word_it->second.emplace(std::string(fields[1]), *count).second) {
        fail_format(line_number, "duplicate pair entry");
      }
    } else {
      if (fields.size() != 2) fail_format(line_number, "expected context<TAB>count");
      std::optional<std::uint64_t> count = util::parse_u64(fields[1]);
      if (!count.has_value() || *count == 0) {
        fail_format(line_number, "context count must be a positive integer");
      }
      if (!table.context_counts_.emplace(std::string(fields[0]), *count).second) {
        fail_format(line_number, "duplicate context entry");
      }
    }
  }
  if (!in_contexts && table.pair_entries() > 0) {
    throw FormatError("missing #contexts section");
  }

  // Every pair must have a marginal at least as large as its own count.
  for (const auto& [word, contexts] : table.pair_counts_) {
    for (const auto& [context, count] : contexts) {
      std::uint64_t marginal = table.context_count(context);
      if (marginal < count) {
        throw FormatError("pair count for (" + word + ", " + context +
                          ") exceeds its context marginal");
      }
    }
  }
  return table;
}

TdpTable TdpTable::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open table file: " + path);
  return load(in);
}

}  // namespace visrank
