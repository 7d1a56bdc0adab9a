#include <iostream>

#include "CLI11.hpp"
#include "authorship/common.hpp"
#include "authorship/config.hpp"
#include "authorship/corpus.hpp"
#include "authorship/evaluation.hpp"
#include "authorship/pipeline.hpp"
#include "authorship/synthetic.hpp"

namespace {

using namespace authorship;

struct StageOptions {
  std::string config;
  bool quiet = false;
};

ExperimentConfig read_config(const StageOptions& o) {
  auto c = load_config(o.config);
  apply_environment(c);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Authorship attribution experiments: features, tree ensembles, soft voting and evaluation."};
  app.require_subcommand(1);

  SyntheticCorpusSpec synth;
  std::string synth_out;
  auto* gen = app.add_subcommand("gen-synth", "Write a synthetic annotated corpus (JSONL)");
  gen->add_option("-o,--out", synth_out, "Output corpus path")->required();
  gen->add_option("--authors", synth.num_authors, "Number of authors")->capture_default_str();
  gen->add_option("--docs", synth.docs_per_author, "Documents per author")->capture_default_str();
  gen->add_option("--tokens", synth.tokens_per_doc, "Tokens per document")->capture_default_str();
  gen->add_option("--divergence", synth.divergence, "Author separation (0 = identical authors)")->capture_default_str();
  gen->add_option("--vocabulary", synth.content_vocabulary, "Content-word vocabulary size")->capture_default_str();
  gen->add_option("--seed", synth.seed, "Random seed")->capture_default_str();

  StageOptions opts;
  auto add_stage = [&](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", opts.config, "Experiment config (TOML)")->required()->check(CLI::ExistingFile);
    sub->add_flag("-q,--quiet", opts.quiet, "Suppress progress output");
    return sub;
  };
  auto* fold = add_stage("fold", "Build the stratified fold plan");
  auto* extract = add_stage("extract", "Extract per-fold feature matrices");
  auto* train = add_stage("train", "Train the feature classifiers");
  auto* predict = add_stage("predict", "Write classifier prediction matrices");
  auto* import = add_stage("import-plm", "Validate and import PLM prediction matrices");
  auto* ensemble = add_stage("ensemble", "Score single models and all ensembles");
  auto* report = add_stage("report", "Write rankings, summary tables, box-plot data and comparisons");
  auto* run = add_stage("run", "Run the full pipeline");
  auto* stub = add_stage("stub-plm", "Write deterministic stub PLM prediction matrices for the configured models");

  std::string cmp_a, cmp_b, cmp_agg = "fold_mean";
  std::size_t cmp_top = kBoxplotTopN;
  auto* compare = app.add_subcommand("compare", "Welch t-test and Cohen's d between two report files");
  compare->add_option("a", cmp_a, "First report JSON")->required()->check(CLI::ExistingFile);
  compare->add_option("b", cmp_b, "Second report JSON")->required()->check(CLI::ExistingFile);
  compare->add_option("--top", cmp_top, "Use the top N scores of each group")->capture_default_str();
  compare->add_option("--aggregation", cmp_agg, "fold_mean or pooled")
      ->check(CLI::IsMember({"fold_mean", "pooled"}))
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const auto corpus = gen_synthetic(synth);
      write_file(synth_out, to_jsonl(corpus));
      std::cout << "wrote " << corpus.size() << " documents by " << corpus.labels().size() << " authors to "
                << synth_out << "\n";
      return 0;
    }
    if (compare->parsed()) {
      const auto a = reports_from_json(read_file(cmp_a));
      const auto b = reports_from_json(read_file(cmp_b));
      const auto agg = cmp_agg == "pooled" ? Aggregation::kPooled : Aggregation::kFoldMean;
      const auto r = compare_reports(a, b, agg, cmp_top);
      std::cout << "t=" << format_double(r.t) << " df=" << format_double(r.df) << " p=" << format_double(r.p)
                << " d=" << format_double(r.cohens_d) << "\n";
      return 0;
    }
    const auto config = read_config(opts);
    std::ostream* log = opts.quiet ? nullptr : &std::cerr;
    if (stub->parsed()) {
      const auto files = write_stub_plm(config, log);
      std::cout << "wrote " << files.size() << " prediction files under " << config.plm_dir.string() << "\n";
      return 0;
    }
    Pipeline pipeline(config, log);
    const std::pair<CLI::App*, Stage> stages[] = {{fold, Stage::kFolds},         {extract, Stage::kExtract},
                                                  {train, Stage::kTrain},        {predict, Stage::kPredict},
                                                  {import, Stage::kImportPlm},   {ensemble, Stage::kEnsemble},
                                                  {report, Stage::kReport},      {run, Stage::kReport}};
    for (const auto& [sub, stage] : stages) {
      if (sub->parsed()) {
        pipeline.run_until(stage);
        std::cout << "outputs in " << config.output_dir.string() << "\n";
        return 0;
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
