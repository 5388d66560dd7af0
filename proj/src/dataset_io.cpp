#include "visrank/dataset_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "visrank/util.hpp"

namespace visrank {

using nlohmann::json;

namespace {

[[noreturn]] void fail_parse(std::size_t line, const std::string& what) {
  throw ParseError("line " + std::to_string(line) + ": " + what);
}

[[noreturn]] void fail_validation(std::size_t line, const std::string& what) {
  throw ValidationError("line " + std::to_string(line) + ": " + what);
}

std::string require_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) fail_parse(line, std::string("missing key \"") + key + "\"");
  if (!it->is_string()) fail_parse(line, std::string("key \"") + key + "\" is not a string");
  return it->get<std::string>();
}

double require_probability(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) fail_parse(line, std::string("missing key \"") + key + "\"");
  if (!it->is_number()) fail_parse(line, std::string("key \"") + key + "\" is not a number");
  double value = it->get<double>();
  if (!(value >= 0.0 && value <= 1.0))
    fail_validation(line, std::string("\"") + key + "\" = " + util::format_double(value) +
                              " outside [0,1]");
  return value;
}

json record_to_json(const EvalRecord& record) {
  json hyps = json::array();
  for (const auto& h : record.hypotheses.items) hyps.push_back({{"word", h.word}, {"p", h.score}});
  json ctxs = json::array();
  for (const auto& c : record.contexts) ctxs.push_back({{"label", c.label}, {"p", c.confidence}});
  return json{{"id", record.id}, {"gold", record.gold}, {"hypotheses", hyps}, {"contexts", ctxs}};
}

}  // namespace

std::span<const Hypothesis> HypothesisSet::top(std::size_t k) const {
  return std::span<const Hypothesis>(items.data(), std::min(k, items.size()));
}

void HypothesisSet::sort_by_score() {
  std::stable_sort(items.begin(), items.end(),
                   [](const Hypothesis& a, const Hypothesis& b) { return a.score > b.score; });
}

bool operator==(const Hypothesis& a, const Hypothesis& b) {
  return a.word == b.word && a.score == b.score;
}

bool operator==(const VisualContext& a, const VisualContext& b) {
  return a.label == b.label && a.confidence == b.confidence;
}

bool operator==(const HypothesisSet& a, const HypothesisSet& b) { return a.items == b.items; }

bool operator==(const EvalRecord& a, const EvalRecord& b) {
  return a.id == b.id && a.gold == b.gold && a.hypotheses == b.hypotheses &&
         a.contexts == b.contexts;
}

std::string normalize_token(std::string_view raw) {
  std::size_t begin = 0;
  std::size_t end = raw.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(raw[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(raw[end - 1]))) --end;
  std::string out;
  out.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    unsigned char c = static_cast<unsigned char>(raw[i]);
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

EvalRecord parse_record_line(std::string_view line, std::size_t line_number) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    fail_parse(line_number, std::string("malformed record: ") + e.what());
  }
  if (!j.is_object()) fail_parse(line_number, "record is not an object");

  EvalRecord record;
  record.id = require_string(j, "id", line_number);
  if (record.id.empty()) fail_validation(line_number, "empty record id");

  record.gold = normalize_token(require_string(j, "gold", line_number));
  if (record.gold.empty()) fail_validation(line_number, "gold word unusable after normalization");

  auto hyps = j.find("hypotheses");
  if (hyps == j.end()) fail_parse(line_number, "missing key \"hypotheses\"");
  if (!hyps->is_array()) fail_parse(line_number, "\"hypotheses\" is not an array");
  if (hyps->empty()) fail_validation(line_number, "empty hypothesis list");
  for (const auto& h : *hyps) {
    if (!h.is_object()) fail_parse(line_number, "hypothesis entry is not an object");
    Hypothesis hyp;
    hyp.word = normalize_token(require_string(h, "word", line_number));
    if (hyp.word.empty())
      fail_validation(line_number, "hypothesis word unusable after normalization");
    hyp.score = require_probability(h, "p", line_number);
    record.hypotheses.items.push_back(std::move(hyp));
  }
  record.hypotheses.sort_by_score();

  auto ctxs = j.find("contexts");
  if (ctxs != j.end()) {
    if (!ctxs->is_array()) fail_parse(line_number, "\"contexts\" is not an array");
    for (const auto& c : *ctxs) {
      if (!c.is_object()) fail_parse(line_number, "context entry is not an object");
      VisualContext ctx;
      ctx.label = normalize_token(require_string(c, "label", line_number));
      if (ctx.label.empty())
        fail_validation(line_number, "context label unusable after normalization");
      ctx.confidence = require_probability(c, "p", line_number);
      record.contexts.push_back(std::move(ctx));
    }
  }
  return record;
}

std::vector<EvalRecord> parse_records(std::istream& in, ParseStats* stats) {
  std::vector<EvalRecord> records;
  StringSet seen_ids;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    bool blank = std::all_of(line.begin(), line.end(), [](unsigned char c) {
      return std::isspace(c);
    });
    if (blank) continue;
    EvalRecord record = parse_record_line(line, line_number);
    if (!seen_ids.insert(record.id).second)
      fail_validation(line_number, "duplicate record id \"" + record.id + "\"");
    if (record.hypotheses.k() > kMaxSupportedK) {
      util::warn("line " + std::to_string(line_number) + ": record \"" + record.id + "\" has k=" +
                 std::to_string(record.hypotheses.k()) + " hypotheses, beyond the supported " +
                 std::to_string(kMaxSupportedK));
      if (stats) ++stats->oversized_lists;
    }
    records.push_back(std::move(record));
  }
  if (stats) stats->records += records.size();
  return records;
}

std::vector<EvalRecord> load_records(const std::string& path, ParseStats* stats) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  return parse_records(in, stats);
}

std::string serialize_record(const EvalRecord& record) { return record_to_json(record).dump(); }

void write_records(std::ostream& out, std::span<const EvalRecord> records) {
  for (const auto& record : records) out << serialize_record(record) << "\n";
}

void save_records(const std::string& path, std::span<const EvalRecord> records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  write_records(out, records);
}

}  // namespace visrank
