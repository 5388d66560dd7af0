#include "visrank/eval.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "nlohmann/json.hpp"
#include "visrank/errors.hpp"

namespace visrank {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail_parse(std::size_t line_number, const std::string& what) {
  throw ParseError("line " + std::to_string(line_number) + ": " + what);
}

std::string accuracy_cell(const ViewTally& tally) {
  if (tally.total == 0) return "-";
  std::ostringstream out;
  out << std::fixed << std::setprecision(4) << tally.accuracy();
  return out.str();
}

std::string counts_cell(const ViewTally& tally) {
  return std::to_string(tally.correct) + "/" + std::to_string(tally.total);
}

}  // namespace

std::vector<Prediction> load_predictions(std::istream& in) {
  std::vector<Prediction> predictions;
  StringSet seen_ids;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
    if (blank) continue;

    json parsed;
    try {
      parsed = json::parse(line);
    } catch (const json::parse_error& e) {
      fail_parse(line_number, std::string("invalid JSON: ") + e.what());
    }
    if (!parsed.is_object()) fail_parse(line_number, "expected a JSON object");
    if (!parsed.contains("id") || !parsed["id"].is_string()) {
      fail_parse(line_number, "missing string key 'id'");
    }
    if (!parsed.contains("reranked") || !parsed["reranked"].is_array()) {
      fail_parse(line_number, "missing array key 'reranked'");
    }

    Prediction prediction;
    prediction.id = parsed["id"].get<std::string>();
    if (!seen_ids.insert(prediction.id).second) {
      throw ValidationError("line " + std::to_string(line_number) + ": duplicate id '" +
                            prediction.id + "'");
    }
    for (const json& entry : parsed["reranked"]) {
      std::string word;
      if (entry.is_string()) {
        word = entry.get<std::string>();
      } else if (entry.is_object() && entry.contains("word") && entry["word"].is_string()) {
        word = entry["word"].get<std::string>();
      } else {
        fail_parse(line_number, "reranked entries must be strings or objects with 'word'");
      }
      word = normalize_token(word);
      if (word.empty()) {
        throw ValidationError("line " + std::to_string(line_number) +
                              ": empty word in reranked list");
      }
      prediction.reranked.push_back(std::move(word));
    }
    predictions.push_back(std::move(prediction));
  }
  return predictions;
}

std::vector<Prediction> load_predictions_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open predictions file: " + path);
  return load_predictions(in);
}

StringSet load_lexicon(std::istream& in) {
  StringSet lexicon;
  std::string line;
  while (std::getline(in, line)) {
    std::string token = normalize_token(line);
    if (!token.empty()) lexicon.insert(std::move(token));
  }
  return lexicon;
}

StringSet load_lexicon_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon file: " + path);
  return load_lexicon(in);
}

EvalReport evaluate(std::span<const EvalRecord> records, std::span<const Prediction> predictions,
                    std::size_t k, const StringSet* lexicon, const std::string& label) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  if (records.size() != predictions.size()) {
    throw std::invalid_argument("record/prediction count mismatch: " +
                                std::to_string(records.size()) + " records, " +
                                std::to_string(predictions.size()) + " predictions");
  }

  StringMap<const Prediction*> by_id;
  for (const Prediction& prediction : predictions) {
    if (!by_id.emplace(prediction.id, &prediction).second) {
      throw std::invalid_argument("duplicate prediction id '" + prediction.id + "'");
    }
  }

  EvalReport report;
  report.label = label;
  report.k = k;
  if (lexicon != nullptr) report.dict = ViewTally{};

  for (const EvalRecord& record : records) {
    auto it = by_id.find(record.id);
    if (it == by_id.end()) {
      throw std::invalid_argument("no prediction for record '" + record.id + "'");
    }
    const Prediction& prediction = *it->second;

    std::span<const Hypothesis> eligible = record.hypotheses.top(k);
    auto in_top_k = [&](std::string_view word) {
      return std::any_of(eligible.begin(), eligible.end(),
                         [&](const Hypothesis& h) { return h.word == word; });
    };

    // Restriction to the top-k keeps the reranked relative order.
    std::string_view predicted;
    for (const std::string& word : prediction.reranked) {
      if (in_top_k(word)) {
        predicted = word;
        break;
      }
    }
    bool correct = !predicted.empty() && predicted == record.gold;

    ++report.full.total;
    if (correct) ++report.full.correct;
    if (in_top_k(record.gold)) {
      ++report.list.total;
      if (correct) ++report.list.correct;
    }
    if (report.dict.has_value() && lexicon->find(record.gold) != lexicon->end()) {
      ++report.dict->total;
      if (correct) ++report.dict->correct;
    }
  }
  return report;
}

std::vector<EvalReport> sweep_k(std::span<const EvalRecord> records, const Cascade& cascade,
                                const RerankModels& models, const RerankConfig& config,
                                std::span<const std::size_t> ks, const StringSet* lexicon) {
  std::vector<EvalReport> reports;
  for (std::size_t k : ks) {
    if (k == 0) throw std::invalid_argument("k must be at least 1");
    std::vector<Prediction> predictions;
    predictions.reserve(records.size());
    for (const EvalRecord& record : records) {
      EvalRecord cut;
      cut.id = record.id;
      cut.gold = record.gold;
      std::span<const Hypothesis> top = record.hypotheses.top(k);
      cut.hypotheses.items.assign(top.begin(), top.end());
      cut.contexts = record.contexts;

      Prediction prediction;
      prediction.id = record.id;
      for (const ScoredHypothesis& hyp : rerank_record(cut, cascade, models, config)) {
        prediction.reranked.push_back(hyp.word);
      }
      predictions.push_back(std::move(prediction));
    }
    reports.push_back(evaluate(records, predictions, k, lexicon, cascade.name));
  }
  return reports;
}

void write_report_tsv(std::ostream& out, std::span<const EvalReport> reports) {
  out << "label\tk\tfull_correct\tfull_total\tfull_acc\tlist_correct\tlist_total\tlist_acc"
         "\tdict_correct\tdict_total\tdict_acc\n";
  for (const EvalReport& report : reports) {
    out << report.label << '\t' << report.k << '\t' << report.full.correct << '\t'
        << report.full.total << '\t' << util::format_double(report.full.accuracy()) << '\t'
        << report.list.correct << '\t' << report.list.total << '\t'
        << util::format_double(report.list.accuracy());
    if (report.dict.has_value()) {
      out << '\t' << report.dict->correct << '\t' << report.dict->total << '\t'
          << util::format_double(report.dict->accuracy());
    } else {
      out << "\t-\t-\t-";
    }
    out << '\n';
  }
}

std::string render_report_table(std::span<const EvalReport> reports) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"label", "k", "full", "(n)", "list", "(n)", "dict", "(n)"});
  for (const EvalReport& report : reports) {
    std::vector<std::string> row;
    row.push_back(report.label.empty() ? "-" : report.label);
    row.push_back(std::to_string(report.k));
    row.push_back(accuracy_cell(report.full));
    row.push_back(counts_cell(report.full));
    row.push_back(accuracy_cell(report.list));
    row.push_back(counts_cell(report.list));
    if (report.dict.has_value()) {
      row.push_back(accuracy_cell(*report.dict));
      row.push_back(counts_cell(*report.dict));
    } else {
      row.push_back("-");
      row.push_back("-");
    }
    rows.push_back(std::move(row));
  }

  std::vector<std::size_t> widths(rows[0].size(), 0);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
  }
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += "  ";
      out += row[i];
      out.append(widths[i] - row[i].size(), ' ');
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  }
  return out;
}

}  // namespace visrank
