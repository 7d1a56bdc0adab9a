#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "authorship/common.hpp"
#include "authorship/config.hpp"
#include "authorship/corpus.hpp"
#include "authorship/ensemble.hpp"
#include "authorship/evaluation.hpp"
#include "authorship/features.hpp"
#include "authorship/interchange.hpp"
#include "authorship/pipeline.hpp"
#include "authorship/synthetic.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace authorship;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const PredictionMatrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.values.begin(), m.values.end(), out.mutable_data());
  return out;
}

PredictionMatrix from_array(std::vector<std::string> doc_ids, std::vector<std::string> class_order, const Array& p) {
  if (p.ndim() != 2 || static_cast<std::size_t>(p.shape(0)) != doc_ids.size() ||
      static_cast<std::size_t>(p.shape(1)) != class_order.size()) {
    throw Error(ErrorCode::kInvalidArgument, "probabilities must have shape (len(doc_ids), len(class_order))");
  }
  PredictionMatrix m(std::move(doc_ids), std::move(class_order));
  std::copy(p.data(), p.data() + p.size(), m.values.begin());
  return m;
}

py::dict prediction_dict(const PredictionMatrix& m) {
  py::dict d;
  d["doc_ids"] = m.doc_ids;
  d["class_order"] = m.class_order;
  d["probabilities"] = to_array(m);
  return d;
}

py::object json_to_py(const std::string& text) { return py::module_::import("json").attr("loads")(text); }

py::dict metrics_dict(const MetricsResult& r) {
  py::dict d;
  d["recall"] = r.per_class.recall;
  d["precision"] = r.per_class.precision;
  d["f1"] = r.per_class.f1;
  d["macro_recall"] = r.macro_recall;
  d["macro_precision"] = r.macro_precision;
  d["macro_f1"] = r.macro_f1;
  return d;
}

py::dict comparison_dict(const ComparisonResult& r) {
  py::dict d;
  d["t"] = r.t;
  d["df"] = r.df;
  d["p"] = r.p;
  d["cohens_d"] = r.cohens_d;
  return d;
}

ExperimentConfig config_for(const fs::path& path, const std::optional<fs::path>& output_dir) {
  auto c = load_config(path);
  apply_environment(c);
  if (output_dir) c.output_dir = fs::absolute(*output_dir);
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Authorship attribution core: corpus, features, tree ensembles, soft voting and evaluation.";

  static py::exception<Error> error_type(m, "AuthorshipError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = py::handle(error_type.ptr())(e.what());
      err.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), err.ptr());
    }
  });

  py::class_<Corpus>(m, "Corpus")
      .def_static("load", [](const fs::path& p) { return load_corpus(p); }, py::arg("path"))
      .def_static("from_jsonl", &parse_corpus_jsonl, py::arg("text"))
      .def("to_jsonl", [](const Corpus& c) { return to_jsonl(c); })
      .def("truncate", [](const Corpus& c, std::size_t limit) { return truncate(c, limit); },
           py::arg("limit") = kDefaultTruncation)
      .def_property_readonly("labels", &Corpus::labels)
      .def_property_readonly("doc_ids",
                             [](const Corpus& c) {
                               std::vector<std::string> ids;
                               for (const auto& d : c.documents()) ids.push_back(d.doc_id);
                               return ids;
                             })
      .def("author_of", [](const Corpus& c, const std::string& id) { return c.find(id).author; })
      .def("author_counts", &Corpus::author_counts)
      .def("__len__", &Corpus::size);

  m.def(
      "gen_synthetic",
      [](std::size_t num_authors, std::size_t docs_per_author, std::size_t tokens_per_doc, double divergence,
         std::size_t content_vocabulary, std::uint64_t seed) {
        SyntheticCorpusSpec s;
        s.num_authors = num_authors;
        s.docs_per_author = docs_per_author;
        s.tokens_per_doc = tokens_per_doc;
        s.divergence = divergence;
        s.content_vocabulary = content_vocabulary;
        s.seed = seed;
        return gen_synthetic(s);
      },
      py::arg("num_authors") = 10, py::arg("docs_per_author") = 20, py::arg("tokens_per_doc") = 510,
      py::arg("divergence") = 1.0, py::arg("content_vocabulary") = 800, py::arg("seed") = 1);

  m.def(
      "make_fold_plan",
      [](const Corpus& c, std::size_t num_folds, std::size_t train, std::size_t validation, std::size_t test,
         std::uint64_t seed) {
        return json_to_py(fold_plan_to_json(make_fold_plan(c, num_folds, {train, validation, test}, seed)));
      },
      py::arg("corpus"), py::arg("num_folds") = 5, py::arg("train") = 16, py::arg("validation") = 2,
      py::arg("test") = 2, py::arg("seed") = 1);

  m.def(
      "extract_features",
      [](const Corpus& c, const std::string& kind, std::size_t min_doc_freq, std::optional<std::size_t> max_features,
         bool relative) {
        FeatureSpec spec;
        spec.kind = FeatureKind::parse(kind);
        spec.min_doc_freq = min_doc_freq;
        spec.max_features = max_features;
        spec.frequency_mode = relative ? FrequencyMode::kRelativeFrequency : FrequencyMode::kRawCount;
        const auto fm = extract(all_documents(c), spec);
        py::dict d;
        d["doc_ids"] = fm.doc_ids;
        d["keys"] = fm.vocabulary.keys();
        d["indptr"] = fm.row_offsets;
        d["indices"] = fm.columns;
        d["values"] = fm.values;
        return d;
      },
      py::arg("corpus"), py::arg("kind"), py::arg("min_doc_freq") = 1, py::arg("max_features") = py::none(),
      py::arg("relative") = true,
      "CSR arrays (indptr, indices, values) over the corpus documents. kind is char:N, token:N or phrase.");

  m.def("softmax", [](const std::vector<double>& logits) { return softmax(logits); }, py::arg("logits"));

  m.def(
      "soft_vote",
      [](const std::vector<py::dict>& members, std::optional<std::vector<double>> weights, const std::string& mode) {
        std::vector<ModelOutput> outs;
        std::vector<std::string> ids;
        for (const auto& d : members) {
          ModelOutput o;
          o.model_id = d["model_id"].cast<std::string>();
          o.group = parse_model_group(d.contains("group") ? d["group"].cast<std::string>() : "feature_classifier");
          o.matrix = from_array(d["doc_ids"].cast<std::vector<std::string>>(),
                                d["class_order"].cast<std::vector<std::string>>(), d["probabilities"].cast<Array>());
          ids.push_back(o.model_id);
          outs.push_back(std::move(o));
        }
        if (mode != "pooled" && mode != "grouped") {
          throw Error(ErrorCode::kInvalidArgument, "mode must be pooled or grouped");
        }
        const auto vm = mode == "grouped" ? VoteMode::kGrouped : VoteMode::kPooled;
        auto spec = weights ? EnsembleSpec{ids, *weights, vm} : EnsembleSpec::uniform(ids, vm);
        const auto r = soft_vote(outs, spec);
        auto d = prediction_dict(r.fused);
        d["predicted"] = r.predicted;
        return d;
      },
      py::arg("members"), py::arg("weights") = py::none(), py::arg("mode") = "pooled",
      "members: dicts with model_id, group (plm or feature_classifier), doc_ids, class_order, probabilities.");

  m.def("enumerate_subsets", &enumerate_subsets, py::arg("ids"), py::arg("min_size") = 2);
  m.def(
      "integrated_enumerate",
      [](std::vector<std::string> plm, std::vector<std::string> fc, std::size_t min_size) {
        std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> out;
        for (auto& p : integrated_enumerate(std::move(plm), std::move(fc), min_size)) {
          out.emplace_back(std::move(p.plm), std::move(p.feature_classifier));
        }
        return out;
      },
      py::arg("plm_ids"), py::arg("fc_ids"), py::arg("min_size") = 2);

  m.def(
      "metrics",
      [](const std::vector<std::string>& truth, const std::vector<std::string>& predicted,
         const std::vector<std::string>& class_order) { return metrics_dict(metrics(confusion(truth, predicted, class_order))); },
      py::arg("truth"), py::arg("predicted"), py::arg("class_order"));
  m.def(
      "welch_t_test",
      [](const std::vector<double>& x, const std::vector<double>& y) { return comparison_dict(welch_t_test(x, y)); },
      py::arg("x"), py::arg("y"));

  m.def(
      "write_predictions",
      [](const fs::path& path, const std::string& model_id, std::size_t fold, const std::vector<std::string>& doc_ids,
         const std::vector<std::string>& class_order, const Array& probabilities, const std::string& split,
         const std::string& group) {
        const auto matrix = from_array(doc_ids, class_order, probabilities);
        write_predictions(path, matrix, {model_id, parse_model_group(group), fold, split, class_order});
      },
      py::arg("path"), py::arg("model_id"), py::arg("fold"), py::arg("doc_ids"), py::arg("class_order"),
      py::arg("probabilities"), py::arg("split") = "test", py::arg("group") = "plm",
      "Writes an interchange CSV and its JSON manifest.");
  m.def(
      "read_predictions", [](const fs::path& path) { return prediction_dict(prediction_from_csv(read_file(path))); },
      py::arg("path"));
  m.def(
      "import_predictions",
      [](const std::vector<fs::path>& paths, const py::object& fold_plan, const std::vector<std::string>& class_order,
         double tolerance) {
        const auto text = py::module_::import("json").attr("dumps")(fold_plan).cast<std::string>();
        ImportOptions opts;
        opts.tolerance = tolerance;
        py::list out;
        for (const auto& imp : import_predictions(paths, fold_plan_from_json(text), class_order, opts)) {
          auto d = prediction_dict(imp.output.matrix);
          d["model_id"] = imp.manifest.model_id;
          d["group"] = std::string(to_string(imp.manifest.group));
          d["fold"] = imp.manifest.fold;
          d["split"] = imp.manifest.split;
          d["sha256"] = imp.sha256;
          out.append(d);
        }
        return out;
      },
      py::arg("paths"), py::arg("fold_plan"), py::arg("class_order"), py::arg("tolerance") = 1e-6,
      "Validates interchange files against a fold plan (as returned by make_fold_plan) and the corpus labels.");

  m.def(
      "config_toml", [](const fs::path& path) { return config_to_toml(load_config(path)); }, py::arg("path"),
      "Canonical TOML of an experiment config with every default filled in.");
  m.def(
      "run_pipeline",
      [](const fs::path& config, const std::string& until, std::optional<fs::path> output_dir) {
        const auto c = config_for(config, output_dir);
        py::gil_scoped_release release;
        Pipeline p(c);
        std::vector<std::pair<std::string, bool>> out;
        for (const auto& r : p.run_until(parse_stage(until))) out.emplace_back(std::string(to_string(r.stage)), r.skipped);
        return out;
      },
      py::arg("config"), py::arg("until") = "report", py::arg("output_dir") = py::none(),
      "Runs the stages up to `until`; returns (stage, skipped) pairs.");
  m.def(
      "write_stub_plm",
      [](const fs::path& config, std::optional<fs::path> output_dir) {
        return write_stub_plm(config_for(config, output_dir));
      },
      py::arg("config"), py::arg("output_dir") = py::none());
  m.def(
      "load_reports", [](const fs::path& path) { return json_to_py(read_file(path)); }, py::arg("path"));
  m.def(
      "compare_reports",
      [](const fs::path& a, const fs::path& b, std::size_t top, const std::string& aggregation) {
        const auto agg = aggregation == "pooled" ? Aggregation::kPooled : Aggregation::kFoldMean;
        return comparison_dict(
            compare_reports(reports_from_json(read_file(a)), reports_from_json(read_file(b)), agg, top));
      },
      py::arg("a"), py::arg("b"), py::arg("top") = kBoxplotTopN, py::arg("aggregation") = "fold_mean");
}
