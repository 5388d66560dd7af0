#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "visrank/errors.hpp"

namespace visrank {

// One candidate transcription with its recognizer softmax mass.
struct Hypothesis {
  std::string word;
  double score = 0.0;
};

// Candidate list for one image, kept sorted by descending score.
struct HypothesisSet {
  std::vector<Hypothesis> items;

  std::size_t k() const noexcept { return items.size(); }
  std::span<const Hypothesis> top(std::size_t k) const;
  // Stable: equal scores keep their input order.
  void sort_by_score();
};

// Object or scene label detected in the image around the text, with the
// classifier confidence. Labels are stored normalized but never split here;
// compound labels ("parking_lot") are handled by the embedding lookup.
struct VisualContext {
  std::string label;
  double confidence = 0.0;
};

struct EvalRecord {
  std::string id;
  std::string gold;
  HypothesisSet hypotheses;
  std::vector<VisualContext> contexts;  // may be empty
};

bool operator==(const Hypothesis& a, const Hypothesis& b);
bool operator==(const VisualContext& a, const VisualContext& b);
bool operator==(const HypothesisSet& a, const HypothesisSet& b);
bool operator==(const EvalRecord& a, const EvalRecord& b);

// Candidate lists beyond this size are accepted but counted as oversized.
inline constexpr std::size_t kMaxSupportedK = 9;

struct ParseStats {
  std::size_t records = 0;
  std::size_t oversized_lists = 0;  // records with k > kMaxSupportedK
};

// Lowercases ASCII letters and strips surrounding whitespace. Digits,
// punctuation and internal characters are kept as-is. An empty result means
// the token is unusable.
std::string normalize_token(std::string_view raw);

// One JSON object per line: {"id":..., "gold":..., "hypotheses":[{"word","p"}],
// "contexts":[{"label","p"}]}. Unknown keys are ignored. Hypotheses arriving
// unsorted are sorted on ingest.
EvalRecord parse_record_line(std::string_view line, std::size_t line_number);
std::vector<EvalRecord> parse_records(std::istream& in, ParseStats* stats = nullptr);
std::vector<EvalRecord> load_records(const std::string& path, ParseStats* stats = nullptr);

std::string serialize_record(const EvalRecord& record);
void write_records(std::ostream& out, std::span<const EvalRecord> records);
void save_records(const std::string& path, std::span<const EvalRecord> records);

}  // namespace visrank
