#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "visrank/dataset_io.hpp"
#include "visrank/embedding_store.hpp"
#include "visrank/eval.hpp"
#include "visrank/reranker.hpp"
#include "visrank/synthetic_bench.hpp"
#include "visrank/tdp.hpp"
#include "visrank/twe_trainer.hpp"
#include "visrank/unigram_lm.hpp"
#include "visrank/version.hpp"

namespace py = pybind11;
using namespace visrank;

namespace {

py::dict tally_dict(const ViewTally& tally) {
  py::dict out;
  out["correct"] = tally.correct;
  out["total"] = tally.total;
  out["accuracy"] = tally.accuracy();
  return out;
}

py::list scored_list(const std::vector<ScoredHypothesis>& scored) {
  py::list out;
  for (const auto& hyp : scored) {
    py::dict d;
    d["word"] = hyp.word;
    d["baseline"] = hyp.baseline;
    d["combined"] = hyp.combined;
    py::list stages;
    for (const auto& stage : hyp.stages) {
      py::dict s;
      s["reranker"] = std::string(reranker_name(stage.kind));
      s["factor"] = stage.factor;
      if (stage.context.has_value()) {
        s["context"] = stage.context->label;
        s["confidence"] = stage.context->confidence;
        s["relatedness"] = stage.context->relatedness;
      }
      stages.append(s);
    }
    d["stages"] = stages;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hypothesis re-ranking with visual context evidence";
  m.attr("__version__") = kVersion;

  py::class_<Hypothesis>(m, "Hypothesis")
      .def(py::init<>())
      .def(py::init([](std::string word, double score) {
             return Hypothesis{std::move(word), score};
           }),
           py::arg("word"), py::arg("score"))
      .def_readwrite("word", &Hypothesis::word)
      .def_readwrite("score", &Hypothesis::score)
      .def("__repr__", [](const Hypothesis& h) {
        return "Hypothesis(" + h.word + ", " + util::format_double(h.score) + ")";
      });

  py::class_<VisualContext>(m, "VisualContext")
      .def(py::init<>())
      .def(py::init([](std::string label, double confidence) {
             return VisualContext{std::move(label), confidence};
           }),
           py::arg("label"), py::arg("confidence"))
      .def_readwrite("label", &VisualContext::label)
      .def_readwrite("confidence", &VisualContext::confidence);

  py::class_<EvalRecord>(m, "EvalRecord")
      .def(py::init<>())
      .def_readwrite("id", &EvalRecord::id)
      .def_readwrite("gold", &EvalRecord::gold)
      .def_readwrite("contexts", &EvalRecord::contexts)
      .def_property(
          "hypotheses", [](const EvalRecord& r) { return r.hypotheses.items; },
          [](EvalRecord& r, std::vector<Hypothesis> items) {
            r.hypotheses.items = std::move(items);
            r.hypotheses.sort_by_score();
          });

  py::class_<RerankConfig>(m, "RerankConfig")
      .def(py::init<>())
      .def_readwrite("beta", &RerankConfig::beta)
      .def_readwrite("max_contexts", &RerankConfig::max_contexts)
      .def_readwrite("clamp_negative_sim", &RerankConfig::clamp_negative_sim)
      .def_readwrite("shared_context", &RerankConfig::shared_context)
      .def_readwrite("twe_input_input", &RerankConfig::twe_input_input);

  py::class_<UnigramModel>(m, "UnigramModel")
      .def(py::init<>())
      .def_static(
          "from_text",
          [](const std::string& text, std::optional<double> oov_floor, double discount) {
            std::istringstream in(text);
            LmOptions options;
            options.oov_floor = oov_floor;
            options.short_word_discount = discount;
            return UnigramModel::build(in, options);
          },
          py::arg("text"), py::arg("oov_floor") = std::nullopt,
          py::arg("short_word_discount") = 1.0)
      .def_static(
          "from_files",
          [](const std::vector<std::string>& paths, std::optional<double> oov_floor,
             double discount) {
            LmOptions options;
            options.oov_floor = oov_floor;
            options.short_word_discount = discount;
            return UnigramModel::build_from_files(paths, options);
          },
          py::arg("paths"), py::arg("oov_floor") = std::nullopt,
          py::arg("short_word_discount") = 1.0)
      .def_static("load", &UnigramModel::load_file, py::arg("path"))
      .def("save", &UnigramModel::save_file, py::arg("path"))
      .def("prob", [](const UnigramModel& lm, std::string_view t) { return lm.prob(t); },
           py::arg("token"))
      .def("count", [](const UnigramModel& lm, std::string_view t) { return lm.count(t); },
           py::arg("token"))
      .def("total", &UnigramModel::total)
      .def("vocab_size", &UnigramModel::vocab_size)
      .def("oov_floor", &UnigramModel::oov_floor);

  py::class_<EmbeddingTable>(m, "EmbeddingTable")
      .def(py::init<>())
      .def_static("load", [](const std::string& path) { return EmbeddingTable::load_file(path); },
                  py::arg("path"))
      .def("save", &EmbeddingTable::save_file, py::arg("path"))
      .def("insert",
           [](EmbeddingTable& table, std::string_view token, const std::vector<double>& vec) {
             table.insert(token, vec);
           },
           py::arg("token"), py::arg("vector"))
      .def("contains",
           [](const EmbeddingTable& t, std::string_view token) { return t.contains(token); },
           py::arg("token"))
      .def("vector_for",
           [](const EmbeddingTable& t, std::string_view label) { return t.vector_for(label); },
           py::arg("label"))
      .def("similarity",
           [](const EmbeddingTable& t, std::string_view w, std::string_view c) {
             return t.similarity(w, c);
           },
           py::arg("word"), py::arg("context_label"))
      .def("dim", &EmbeddingTable::dim)
      .def("__len__", &EmbeddingTable::size)
      .def_static("cosine",
                  [](const std::vector<double>& a, const std::vector<double>& b) {
                    return EmbeddingTable::cosine(a, b);
                  },
                  py::arg("a"), py::arg("b"));

  py::class_<TdpTable>(m, "TdpTable")
      .def(py::init<>())
      .def_static("fit",
                  [](const std::vector<EvalRecord>& records, double floor) {
                    return TdpTable::fit(records, floor);
                  },
                  py::arg("records"), py::arg("floor") = TdpTable::kDefaultFloor)
      .def_static("load", &TdpTable::load_file, py::arg("path"))
      .def("save", &TdpTable::save_file, py::arg("path"))
      .def("prob",
           [](const TdpTable& t, std::string_view w, std::string_view c) {
             return t.prob(w, c);
           },
           py::arg("word"), py::arg("context_label"))
      .def("floor", &TdpTable::floor)
      .def("pair_entries", &TdpTable::pair_entries)
      .def("context_entries", &TdpTable::context_entries);

  py::class_<TrainedEmbeddings>(m, "PairEmbeddings")
      .def(py::init<>())
      .def_readonly("input", &TrainedEmbeddings::input)
      .def_readonly("output", &TrainedEmbeddings::output)
      .def_readonly("epoch_losses", &TrainedEmbeddings::epoch_losses)
      .def("dim", &TrainedEmbeddings::dim)
      .def("similarity",
           [](const TrainedEmbeddings& t, std::string_view w, std::string_view c,
              bool input_input) { return t.similarity(w, c, input_input); },
           py::arg("word"), py::arg("context_label"), py::arg("input_input") = false)
      .def("save", &TrainedEmbeddings::save, py::arg("prefix"))
      .def_static("load", &TrainedEmbeddings::load, py::arg("prefix"));

  m.def("normalize_token",
        [](std::string_view raw) { return normalize_token(raw); }, py::arg("raw"));
  m.def("cascade_names", &cascade_names);
  m.def("load_records",
        [](const std::string& path) { return load_records(path); }, py::arg("path"));
  m.def("save_records",
        [](const std::string& path, const std::vector<EvalRecord>& records) {
          save_records(path, records);
        },
        py::arg("path"), py::arg("records"));

  m.def(
      "train_pair_embeddings",
      [](const std::vector<EvalRecord>& records, std::size_t dim, std::size_t epochs,
         std::size_t negatives, double learning_rate, std::uint64_t seed,
         const EmbeddingTable* init) {
        auto pairs = pairs_from_records(records);
        SkipGramConfig config;
        config.dim = dim;
        config.epochs = epochs;
        config.negatives = negatives;
        config.learning_rate = learning_rate;
        config.seed = seed;
        return train_twe(pairs, config, init);
      },
      py::arg("records"), py::arg("dim") = 300, py::arg("epochs") = 5,
      py::arg("negatives") = 5, py::arg("learning_rate") = 0.025, py::arg("seed") = 1,
      py::arg("init").none(true) = nullptr);

  m.def(
      "rerank",
      [](const EvalRecord& record, const std::string& cascade, const UnigramModel* lm,
         const EmbeddingTable* embeddings, const TdpTable* tdp, const TrainedEmbeddings* twe,
         const RerankConfig& config) {
        RerankModels models;
        models.ulm = lm;
        models.embeddings = embeddings;
        models.tdp = tdp;
        models.twe = twe;
        return scored_list(rerank_record(record, cascade_by_name(cascade), models, config));
      },
      py::arg("record"), py::arg("cascade"), py::arg("lm").none(true) = nullptr,
      py::arg("embeddings").none(true) = nullptr, py::arg("tdp").none(true) = nullptr,
      py::arg("twe").none(true) = nullptr, py::arg("config") = RerankConfig{});

  m.def(
      "evaluate",
      [](const std::vector<EvalRecord>& records,
         const std::vector<std::vector<std::string>>& reranked, std::size_t k,
         const std::optional<std::vector<std::string>>& lexicon, const std::string& label) {
        if (reranked.size() != records.size()) {
          throw std::invalid_argument("need one reranked word list per record");
        }
        std::vector<Prediction> predictions;
        predictions.reserve(records.size());
        for (std::size_t i = 0; i < records.size(); ++i) {
          predictions.push_back(Prediction{records[i].id, reranked[i]});
        }
        StringSet lex;
        if (lexicon.has_value()) {
          for (const auto& entry : *lexicon) {
            std::string token = normalize_token(entry);
            if (!token.empty()) lex.insert(std::move(token));
          }
        }
        auto report =
            evaluate(records, predictions, k, lexicon.has_value() ? &lex : nullptr, label);
        py::dict out;
        out["label"] = report.label;
        out["k"] = report.k;
        out["full"] = tally_dict(report.full);
        out["list"] = tally_dict(report.list);
        out["dict"] = report.dict.has_value() ? py::object(tally_dict(*report.dict))
                                              : py::object(py::none());
        return out;
      },
      py::arg("records"), py::arg("reranked"), py::arg("k"),
      py::arg("lexicon") = std::nullopt, py::arg("label") = "");

  m.def(
      "generate_bench",
      [](const std::string& out_dir, std::size_t records, std::size_t k, double gold_top1,
         double strength, std::uint64_t seed, std::size_t gold_vocab,
         std::size_t distractor_vocab, std::size_t train_records) {
        BenchSpec spec;
        spec.n_records = records;
        spec.k = k;
        spec.gold_top1_rate = gold_top1;
        spec.correlation_strength = strength;
        spec.seed = seed;
        spec.gold_vocab = gold_vocab;
        spec.distractor_vocab = distractor_vocab;
        spec.train_records = train_records;
        generate_bench(spec, out_dir);
      },
      py::arg("out_dir"), py::arg("records") = 200, py::arg("k") = 3,
      py::arg("gold_top1") = 0.4, py::arg("strength") = 0.9, py::arg("seed") = 7,
      py::arg("gold_vocab") = 40, py::arg("distractor_vocab") = 120,
      py::arg("train_records") = 400);
}
