#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "genesel/boosting.hpp"
#include "genesel/classifiers.hpp"
#include "genesel/dataset.hpp"
#include "genesel/error.hpp"
#include "genesel/ga.hpp"
#include "genesel/metrics.hpp"
#include "genesel/pipeline.hpp"
#include "genesel/synth.hpp"

namespace genesel::cli {
namespace {

namespace fs = std::filesystem;
using pipeline::PipelineConfig;

struct DataOptions {
  std::string path;
  std::string label_column = "last";
  std::string missing_token = "NA";
};

struct Options {
  DataOptions data;
  PipelineConfig cfg;
  std::uint64_t seed = 0;
  std::string loss = "logistic";
  std::string protocol = "paper";
  std::vector<std::string> classifiers = {"linear_svm", "gaussian_nb"};
  std::size_t svm_epochs = 200;
  double svm_c = 1.0;
  std::string out;
  std::string markdown_out;
  std::string trace_out;
  std::string model_out;
  std::string format = "json";
  std::string genes_file;
  std::string dir_a;
  std::string dir_b;
  double alpha = 0.05;
  bool timings = false;
  std::string config_file;
  synth::SynthSpec synth;
  std::string truth_out;
};

void add_data_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--data", o.data.path, "Input CSV (header row, one sample per line)")->required();
  cmd->add_option("--label-column", o.data.label_column, "Position of the class label column")
      ->check(CLI::IsMember({"first", "last"}));
  cmd->add_option("--missing-token", o.data.missing_token, "Cell text treated as missing");
  cmd->add_option("--impute-neighbors", o.cfg.impute_neighbors, "Neighbours used for imputation");
}

void add_boost_options(CLI::App* cmd, Options& o) {
  auto& b = o.cfg.boost;
  cmd->add_option("--trees", b.n_estimators, "Boosting rounds");
  cmd->add_option("--max-depth", b.max_depth, "Maximum tree depth");
  cmd->add_option("--subsample", b.subsample, "Row fraction per tree");
  cmd->add_option("--eta", b.learning_rate, "Learning rate (shrinkage)");
  cmd->add_option("--lambda", b.lambda, "L2 leaf-weight regularizer");
  cmd->add_option("--gamma", b.gamma, "Per-split complexity cost");
  cmd->add_option("--loss", o.loss, "Boosting loss")->check(CLI::IsMember({"logistic", "squared"}));
}

void add_ga_options(CLI::App* cmd, Options& o) {
  auto& g = o.cfg.ga;
  cmd->add_option("--pop", g.population_size, "GA population size");
  cmd->add_option("--gens", g.iterations, "GA generations");
  cmd->add_option("--cx-prob", g.crossover_prob, "Uniform crossover probability");
  cmd->add_option("--mut-prob", g.mutation_prob, "Per-bit mutation probability");
  cmd->add_option("--tournament", g.tournament_size, "Tournament size");
  cmd->add_option("--elitism", g.elitism_count, "Elite chromosomes copied per generation");
  cmd->add_option("--knn-k", g.fitness_knn_k, "k of the k-NN fitness classifier");
  cmd->add_option("--fitness-folds", g.fitness_folds, "Internal folds of the fitness CV");
  cmd->add_option("--restarts", g.restarts, "Independent GA runs");
  cmd->add_option("--threads", g.threads, "Fitness worker threads (0 = all cores)");
}

void add_eval_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--cv-k", o.cfg.cv_k, "Cross-validation folds");
  cmd->add_option("--cv-rounds", o.cfg.cv_rounds, "Cross-validation repetitions");
  cmd->add_option("--classifiers", o.classifiers, "Evaluation classifiers")
      ->delimiter(',')
      ->check(CLI::IsMember({"linear_svm", "svm", "gaussian_nb", "nb", "knn"}));
  cmd->add_option("--svm-epochs", o.svm_epochs, "Linear SVM passes over the data");
  cmd->add_option("--svm-c", o.svm_c, "Linear SVM regularization trade-off");
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--seed", o.seed, "Seed for every random component");
  cmd->add_option("--config", o.config_file, "key=value or JSON file with default flag values");
}

// Applies string/enum flags and the master seed onto the typed config.
void finalize(Options& o) {
  o.cfg.boost.loss = boosting::loss_from_string(o.loss);
  o.cfg.protocol = pipeline::protocol_from_string(o.protocol);
  o.cfg.eval_classifiers.clear();
  for (const auto& name : o.classifiers) {
    classifiers::ClassifierSpec spec;
    spec.kind = classifiers::kind_from_string(name);
    spec.knn_k = o.cfg.ga.fitness_knn_k;
    spec.svm_epochs = o.svm_epochs;
    spec.svm_c = o.svm_c;
    o.cfg.eval_classifiers.push_back(spec);
  }
  o.cfg.set_seed(o.seed);
}

CsvOptions csv_options(const DataOptions& d) {
  CsvOptions c;
  c.label_column = d.label_column == "first" ? LabelColumn::first : LabelColumn::last;
  c.missing_token = d.missing_token;
  return c;
}

struct Prepared {
  Dataset dataset;
  std::string description;
};

// Load, impute (when needed) and min-max normalize the whole file.
Prepared prepare(const Options& o) {
  auto loaded = load_csv(o.data.path, csv_options(o.data));
  Dataset ds = std::move(loaded.dataset);
  std::string desc;
  if (!loaded.mask.empty()) {
    ds = impute_knn(ds, loaded.mask, o.cfg.impute_neighbors);
    desc = "knn imputation of " + std::to_string(loaded.mask.size()) + " cells (n_neighbors=" +
           std::to_string(o.cfg.impute_neighbors) + "), then ";
  }
  desc += "min-max scaling to [0, 1]; both fitted on the whole dataset before any split";
  return {normalize_minmax(ds), desc};
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    pipeline::write_file_atomic(path, text);
  }
}

GeneSubset read_gene_list(const std::string& path, const Dataset& ds) {
  const std::string text = pipeline::read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    return pipeline::report_from_json(text).final_indices();
  }
  std::string normalized = text;
  std::ranges::replace(normalized, ',', ' ');
  std::istringstream in(normalized);
  GeneSubset genes;
  std::string token;
  while (in >> token) {
    auto it = std::ranges::find(ds.gene_ids(), token);
    if (it != ds.gene_ids().end()) {
      genes.push_back(static_cast<GeneIndex>(it - ds.gene_ids().begin()));
      continue;
    }
    if (!token.empty() && std::ranges::all_of(token, [](char ch) { return ch >= '0' && ch <= '9'; })) {
      genes.push_back(std::stoull(token));
      continue;
    }
    throw ValidationError("unknown gene '" + token + "' in " + path);
  }
  std::ranges::sort(genes);
  return genes;
}

std::string with_extension(const std::string& path, const std::string& ext) {
  fs::path p(path);
  p.replace_extension(ext);
  return p.string();
}

int cmd_synth(Options& o, std::ostream& out) {
  const auto result = synth::generate_synth(o.synth);
  std::ostringstream csv;
  write_csv(csv, result.dataset, result.mask, csv_options(o.data));
  emit(o.out, csv.str(), out);
  if (!o.truth_out.empty()) {
    nlohmann::ordered_json truth;
    truth["informative"] = result.informative;
    std::vector<std::string> ids;
    for (GeneIndex g : result.informative) ids.push_back(result.dataset.gene_ids()[g]);
    truth["informative_ids"] = ids;
    truth["missing_cells"] = result.mask.size();
    pipeline::write_file_atomic(o.truth_out, truth.dump(2) + "\n");
  }
  return kOk;
}

int cmd_rank(Options& o, std::ostream& out, std::ostream& err) {
  finalize(o);
  o.cfg.boost.validate();
  const auto prepared = prepare(o);
  const Dataset& ds = prepared.dataset;
  const auto model = boosting::fit(ds, o.cfg.boost);
  const auto report = boosting::importances(model);
  if (!o.model_out.empty()) pipeline::write_file_atomic(o.model_out, boosting::to_json(model) + "\n");

  std::size_t positive = 0;
  for (double g : report.total_gain) positive += g > 0.0 ? 1 : 0;
  if (o.format == "csv") {
    std::ostringstream csv;
    csv.precision(17);
    csv << "rank,index,id,total_gain,split_count\n";
    for (std::size_t r = 0; r < report.ranking.size(); ++r) {
      const GeneIndex g = report.ranking[r];
      csv << r + 1 << ',' << g << ',' << ds.gene_ids()[g] << ',' << report.total_gain[g] << ','
          << report.split_count[g] << '\n';
    }
    emit(o.out, csv.str(), out);
  } else {
    nlohmann::ordered_json doc;
    doc["schema_version"] = 1;
    doc["dataset"] = {{"name", ds.name()}, {"n_samples", ds.n_samples()}, {"n_genes", ds.n_genes()}};
    doc["importance"] = "total_gain";
    doc["n_positive"] = positive;
    nlohmann::ordered_json genes = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < report.ranking.size(); ++r) {
      const GeneIndex g = report.ranking[r];
      genes.push_back({{"rank", r + 1},
                       {"index", g},
                       {"id", ds.gene_ids()[g]},
                       {"total_gain", report.total_gain[g]},
                       {"split_count", report.split_count[g]}});
    }
    doc["genes"] = std::move(genes);
    emit(o.out, doc.dump(2) + "\n", out);
  }
  err << "rank: " << positive << " of " << ds.n_genes() << " genes have positive gain\n";
  if (positive == 0) {
    throw EmptySelectionError("no gene has positive importance");
  }
  return kOk;
}

int cmd_select(Options& o, std::ostream& out, std::ostream& err) {
  finalize(o);
  o.cfg.validate();
  const auto prepared = prepare(o);
  auto report = pipeline::run_pipeline(prepared.dataset, o.cfg);
  report.preprocessing = prepared.description;
  emit(o.out, pipeline::to_json(report, {.include_runtimes = o.timings}), out);

  std::string md_path = o.markdown_out;
  if (md_path.empty() && !o.out.empty() && o.out != "-" && fs::is_regular_file(o.out)) {
    md_path = with_extension(o.out, ".md");
  }
  if (!md_path.empty()) pipeline::write_file_atomic(md_path, pipeline::to_markdown(report));
  if (!o.trace_out.empty()) {
    // The trace is a by-product of the stage-2 run already inside the report;
    // rerunning the selection reproduces it exactly.
    const auto sel = pipeline::select_genes(prepared.dataset, o.cfg);
    std::ostringstream csv;
    sel.ga.trace.write_csv(csv);
    pipeline::write_file_atomic(o.trace_out, csv.str());
  }
  err << "select: " << report.n_genes << " -> " << report.stage1_size() << " -> "
      << report.final_size() << " genes; stage1 " << report.runtimes.stage1 << " s, stage2 "
      << report.runtimes.stage2 << " s, evaluation " << report.runtimes.evaluation << " s\n";
  return kOk;
}

int cmd_evaluate(Options& o, std::ostream& out) {
  finalize(o);
  for (const auto& s : o.cfg.eval_classifiers) s.validate();
  const auto prepared = prepare(o);
  const Dataset& ds = prepared.dataset;
  const GeneSubset genes = read_gene_list(o.genes_file, ds);
  const FoldPlan plan = make_folds(ds.labels(), o.cfg.cv_k, o.cfg.cv_rounds, o.cfg.seed);

  pipeline::PipelineReport summary;
  summary.dataset = ds.name();
  summary.n_samples = ds.n_samples();
  summary.n_genes = ds.n_genes();
  summary.n_classes = ds.n_classes();
  nlohmann::ordered_json doc;
  doc["schema_version"] = 1;
  doc["dataset"] = {{"name", ds.name()}, {"n_samples", ds.n_samples()}, {"n_genes", ds.n_genes()}};
  doc["genes"] = genes;
  nlohmann::ordered_json evals = nlohmann::ordered_json::array();
  std::ostringstream table;
  table << "| Classifier | Accuracy | Precision | Recall | F-score |\n|---|---|---|---|---|\n";
  for (const auto& spec : o.cfg.eval_classifiers) {
    const auto cv = metrics::cross_validate(genes, ds, spec, plan);
    auto ms = [](const metrics::MeanStd& v) { return nlohmann::ordered_json{{"mean", v.mean}, {"std", v.std}}; };
    evals.push_back({{"classifier", classifiers::to_string(spec.kind)},
                     {"accuracy", ms(cv.accuracy)},
                     {"precision", ms(cv.precision)},
                     {"recall", ms(cv.recall)},
                     {"f_score", ms(cv.f_score)},
                     {"scored_folds", cv.folds.size()},
                     {"skipped_folds", cv.skipped.size()}});
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "| %s | %.2f (+/- %.2f) | %.2f (+/- %.2f) | %.2f (+/- %.2f) | %.2f (+/- %.2f) |\n",
                  classifiers::to_string(spec.kind).c_str(), 100 * cv.accuracy.mean,
                  100 * cv.accuracy.std, 100 * cv.precision.mean, 100 * cv.precision.std,
                  100 * cv.recall.mean, 100 * cv.recall.std, 100 * cv.f_score.mean,
                  100 * cv.f_score.std);
    table << buf;
  }
  doc["evaluation"] = std::move(evals);
  if (o.out.empty() || o.out == "-") {
    out << table.str();
  } else {
    pipeline::write_file_atomic(o.out, doc.dump(2) + "\n");
    out << table.str();
  }
  return kOk;
}

std::vector<pipeline::PipelineReport> load_report_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("'" + dir + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::ranges::sort(files);
  std::vector<pipeline::PipelineReport> reports;
  for (const auto& f : files) reports.push_back(pipeline::report_from_json(pipeline::read_file(f.string())));
  if (reports.empty()) throw ValidationError("no report JSON files in '" + dir + "'");
  return reports;
}

int cmd_compare(Options& o, std::ostream& out) {
  const auto rows = pipeline::compare_report_sets(load_report_dir(o.dir_a), load_report_dir(o.dir_b), o.alpha);
  std::ostringstream table;
  table << "| Classifier | Datasets | W | p-value | Method | Verdict (alpha = " << o.alpha << ") |\n";
  table << "|---|---:|---:|---:|---|---|\n";
  nlohmann::ordered_json doc;
  doc["schema_version"] = 1;
  doc["alpha"] = o.alpha;
  nlohmann::ordered_json items = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    const auto& r = row.result;
    const char* verdict = r.degenerate ? "no difference" : (r.significant ? "significant" : "not significant");
    char buf[256];
    std::snprintf(buf, sizeof buf, "| %s | %zu | %.1f | %.6f | %s | %s |\n", row.classifier.c_str(),
                  row.datasets.size(), r.w_statistic, r.p_value, metrics::to_string(r.method).c_str(),
                  verdict);
    table << buf;
    items.push_back({{"classifier", row.classifier},
                     {"datasets", row.datasets},
                     {"accuracy_a", row.accuracy_a},
                     {"accuracy_b", row.accuracy_b},
                     {"w_statistic", r.w_statistic},
                     {"p_value", r.p_value},
                     {"n_effective", r.n_effective},
                     {"method", metrics::to_string(r.method)},
                     {"zero_policy", metrics::to_string(r.zero_policy)},
                     {"degenerate", r.degenerate},
                     {"verdict", verdict}});
  }
  doc["comparisons"] = std::move(items);
  out << table.str();
  if (!o.out.empty()) pipeline::write_file_atomic(o.out, doc.dump(2) + "\n");
  return kOk;
}

int cmd_trace(Options& o, std::ostream& out) {
  finalize(o);
  o.cfg.boost.validate();
  o.cfg.ga.validate();
  const auto prepared = prepare(o);
  const auto sel = pipeline::select_genes(prepared.dataset, o.cfg);
  std::ostringstream csv;
  sel.ga.trace.write_csv(csv);
  emit(o.out.empty() ? o.trace_out : o.out, csv.str(), out);
  return kOk;
}

// Reads `--config FILE` defaults and splices them in as flags, skipping any
// flag the command line already sets.
std::vector<std::string> apply_config_file(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || args.empty()) return args;

  const std::string text = pipeline::read_file(path);
  std::vector<std::pair<std::string, std::string>> items;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config '" + path + "': " + e.what());
    }
    for (const auto& [key, value] : doc.items()) {
      if (value.is_string()) {
        items.emplace_back(key, value.get<std::string>());
      } else if (value.is_boolean()) {
        if (value.get<bool>()) items.emplace_back(key, "");
      } else if (value.is_array()) {
        std::string joined;
        for (const auto& v : value) {
          if (!joined.empty()) joined += ',';
          joined += v.is_string() ? v.get<std::string>() : v.dump();
        }
        items.emplace_back(key, joined);
      } else {
        items.emplace_back(key, value.dump());
      }
    }
  } else {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      auto trim = [](std::string s) {
        s.erase(0, s.find_first_not_of(" \t\r"));
        s.erase(s.find_last_not_of(" \t\r") + 1);
        return s;
      };
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("config '" + path + "' line " + std::to_string(line_no) + ": expected key=value");
      }
      items.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
  }

  std::vector<std::string> extra;
  for (auto [key, value] : items) {
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    const std::string flag = "--" + key;
    const bool present = std::ranges::any_of(args, [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (present) continue;
    extra.push_back(flag);
    if (!value.empty()) extra.push_back(value);
  }
  // args[0] is the subcommand; config values go right after it.
  args.insert(args.begin() + 1, extra.begin(), extra.end());
  return args;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"genesel: two-stage gene selection (boosted-tree ranking + genetic search)", "genesel"};
  app.require_subcommand(1);

  auto* synth_cmd = app.add_subcommand("synth", "Write a planted-signal synthetic dataset as CSV");
  synth_cmd->add_option("--samples", o.synth.n_samples, "Number of samples");
  synth_cmd->add_option("--genes", o.synth.n_genes, "Number of genes");
  synth_cmd->add_option("--informative", o.synth.n_informative, "Number of informative genes");
  synth_cmd->add_option("--classes", o.synth.n_classes, "Number of classes");
  synth_cmd->add_option("--sigma", o.synth.noise_sigma, "Noise standard deviation");
  synth_cmd->add_option("--missing-fraction", o.synth.missing_fraction, "Fraction of cells masked");
  synth_cmd->add_option("--seed", o.synth.seed, "Generator seed");
  synth_cmd->add_option("--out", o.out, "Output CSV (default stdout)");
  synth_cmd->add_option("--truth-out", o.truth_out, "Write informative gene indices as JSON");
  synth_cmd->add_option("--label-column", o.data.label_column)->check(CLI::IsMember({"first", "last"}));
  synth_cmd->add_option("--missing-token", o.data.missing_token);

  auto* rank_cmd = app.add_subcommand("rank", "Stage 1 only: boosted-tree gene importances");
  add_data_options(rank_cmd, o);
  add_boost_options(rank_cmd, o);
  add_common(rank_cmd, o);
  rank_cmd->add_option("--out", o.out, "Output file (default stdout)");
  rank_cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  rank_cmd->add_option("--model-out", o.model_out, "Write the fitted ensemble as JSON");

  auto* select_cmd = app.add_subcommand("select", "Full pipeline: select genes and cross-validate");
  add_data_options(select_cmd, o);
  add_boost_options(select_cmd, o);
  add_ga_options(select_cmd, o);
  add_eval_options(select_cmd, o);
  add_common(select_cmd, o);
  select_cmd->add_option("--protocol", o.protocol, "Evaluation protocol")
      ->check(CLI::IsMember({"paper", "nested"}));
  select_cmd->add_option("--out", o.out, "Report JSON (default stdout)");
  select_cmd->add_option("--markdown-out", o.markdown_out, "Markdown summary (default: <out>.md)");
  select_cmd->add_option("--trace-out", o.trace_out, "GA trace CSV");
  select_cmd->add_flag("--timings", o.timings, "Include wall-clock runtimes in the JSON report");

  auto* eval_cmd = app.add_subcommand("evaluate", "Cross-validate classifiers on a given gene subset");
  add_data_options(eval_cmd, o);
  add_eval_options(eval_cmd, o);
  add_common(eval_cmd, o);
  eval_cmd->add_option("--genes", o.genes_file,
                       "Gene list (ids or indices, comma/whitespace separated) or a report JSON")
      ->required();
  eval_cmd->add_option("--knn-k", o.cfg.ga.fitness_knn_k, "k for the knn classifier");
  eval_cmd->add_option("--out", o.out, "Write results as JSON");

  auto* compare_cmd = app.add_subcommand("compare", "Wilcoxon signed-rank test between two report sets");
  compare_cmd->add_option("--a", o.dir_a, "Directory of report JSON files (method A)")->required();
  compare_cmd->add_option("--b", o.dir_b, "Directory of report JSON files (method B)")->required();
  compare_cmd->add_option("--alpha", o.alpha, "Significance level");
  compare_cmd->add_option("--out", o.out, "Write results as JSON");

  auto* trace_cmd = app.add_subcommand("trace", "Run stages 1 and 2 and write the GA trace CSV");
  add_data_options(trace_cmd, o);
  add_boost_options(trace_cmd, o);
  add_ga_options(trace_cmd, o);
  add_common(trace_cmd, o);
  trace_cmd->add_option("--out,--trace-out", o.out, "Trace CSV (default stdout)");

  try {
    auto args = apply_config_file(raw_args);
    std::ranges::reverse(args);
    try {
      app.parse(args);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kOk : kValidationError;
    }
    if (synth_cmd->parsed()) return cmd_synth(o, out);
    if (rank_cmd->parsed()) return cmd_rank(o, out, err);
    if (select_cmd->parsed()) return cmd_select(o, out, err);
    if (eval_cmd->parsed()) return cmd_evaluate(o, out);
    if (compare_cmd->parsed()) return cmd_compare(o, out);
    if (trace_cmd->parsed()) return cmd_trace(o, out);
    err << app.help();
    return kValidationError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  }
}

}  // namespace genesel::cli
