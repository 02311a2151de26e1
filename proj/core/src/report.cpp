#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "genesel/error.hpp"
#include "genesel/pipeline.hpp"

namespace genesel::pipeline {

using nlohmann::ordered_json;

namespace {

constexpr const char* kComplexityNote =
    "stage 1 uses exact greedy split search, roughly n_estimators * max_depth * M * N per output; "
    "stage 2 costs about iterations * population * one internal k-NN cross-validation";

ordered_json mean_std_json(const metrics::MeanStd& v) {
  return {{"mean", v.mean}, {"std", v.std}};
}

metrics::MeanStd mean_std_from(const ordered_json& j) {
  return {j.at("mean").get<double>(), j.at("std").get<double>()};
}

ordered_json classifier_json(const classifiers::ClassifierSpec& s) {
  return {{"kind", classifiers::to_string(s.kind)},
          {"knn_k", s.knn_k},
          {"svm_c", s.svm_c},
          {"svm_epochs", s.svm_epochs},
          {"nb_var_smoothing", s.nb_var_smoothing},
          {"seed", s.seed}};
}

classifiers::ClassifierSpec classifier_from(const ordered_json& j) {
  classifiers::ClassifierSpec s;
  s.kind = classifiers::kind_from_string(j.at("kind").get<std::string>());
  s.knn_k = j.at("knn_k").get<std::size_t>();
  s.svm_c = j.at("svm_c").get<double>();
  s.svm_epochs = j.at("svm_epochs").get<std::size_t>();
  s.nb_var_smoothing = j.at("nb_var_smoothing").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

ordered_json config_json(const PipelineConfig& c) {
  ordered_json classifiers = ordered_json::array();
  for (const auto& s : c.eval_classifiers) classifiers.push_back(classifier_json(s));
  const auto& b = c.boost;
  const auto& g = c.ga;
  return {{"seed", c.seed},
          {"protocol", to_string(c.protocol)},
          {"cv_k", c.cv_k},
          {"cv_rounds", c.cv_rounds},
          {"impute_neighbors", c.impute_neighbors},
          {"refit_scaling_per_fold", c.refit_scaling_per_fold},
          {"boost",
           {{"n_estimators", b.n_estimators},
            {"max_depth", b.max_depth},
            {"subsample", b.subsample},
            {"learning_rate", b.learning_rate},
            {"lambda", b.lambda},
            {"gamma", b.gamma},
            {"loss", boosting::to_string(b.loss)},
            {"seed", b.seed}}},
          {"ga",
           {{"population_size", g.population_size},
            {"iterations", g.iterations},
            {"crossover_prob", g.crossover_prob},
            {"mutation_prob", g.mutation_prob},
            {"tournament_size", g.tournament_size},
            {"elitism_count", g.elitism_count},
            {"fitness_knn_k", g.fitness_knn_k},
            {"fitness_folds", g.fitness_folds},
            {"restarts", g.restarts},
            {"seed", g.seed}}},
          {"eval_classifiers", std::move(classifiers)}};
}

PipelineConfig config_from(const ordered_json& j) {
  PipelineConfig c;
  c.seed = j.at("seed").get<std::uint64_t>();
  c.protocol = protocol_from_string(j.at("protocol").get<std::string>());
  c.cv_k = j.at("cv_k").get<std::size_t>();
  c.cv_rounds = j.at("cv_rounds").get<std::size_t>();
  c.impute_neighbors = j.at("impute_neighbors").get<std::size_t>();
  c.refit_scaling_per_fold = j.at("refit_scaling_per_fold").get<bool>();
  const auto& b = j.at("boost");
  c.boost.n_estimators = b.at("n_estimators").get<std::size_t>();
  c.boost.max_depth = b.at("max_depth").get<std::size_t>();
  c.boost.subsample = b.at("subsample").get<double>();
  c.boost.learning_rate = b.at("learning_rate").get<double>();
  c.boost.lambda = b.at("lambda").get<double>();
  c.boost.gamma = b.at("gamma").get<double>();
  c.boost.loss = boosting::loss_from_string(b.at("loss").get<std::string>());
  c.boost.seed = b.at("seed").get<std::uint64_t>();
  const auto& g = j.at("ga");
  c.ga.population_size = g.at("population_size").get<std::size_t>();
  c.ga.iterations = g.at("iterations").get<std::size_t>();
  c.ga.crossover_prob = g.at("crossover_prob").get<double>();
  c.ga.mutation_prob = g.at("mutation_prob").get<double>();
  c.ga.tournament_size = g.at("tournament_size").get<std::size_t>();
  c.ga.elitism_count = g.at("elitism_count").get<std::size_t>();
  c.ga.fitness_knn_k = g.at("fitness_knn_k").get<std::size_t>();
  c.ga.fitness_folds = g.at("fitness_folds").get<std::size_t>();
  c.ga.restarts = g.at("restarts").get<std::size_t>();
  c.ga.seed = g.at("seed").get<std::uint64_t>();
  c.eval_classifiers.clear();
  for (const auto& s : j.at("eval_classifiers")) c.eval_classifiers.push_back(classifier_from(s));
  return c;
}

ordered_json genes_json(const std::vector<SelectedGene>& genes) {
  ordered_json out = ordered_json::array();
  for (const auto& g : genes) out.push_back({{"index", g.index}, {"id", g.id}, {"gain", g.gain}});
  return out;
}

std::vector<SelectedGene> genes_from(const ordered_json& j) {
  std::vector<SelectedGene> out;
  for (const auto& g : j) {
    out.push_back({g.at("index").get<GeneIndex>(), g.at("id").get<std::string>(),
                   g.at("gain").get<double>()});
  }
  return out;
}

ordered_json summary_json(const metrics::CvSummary& s) {
  ordered_json folds = ordered_json::array();
  for (const auto& f : s.folds) {
    folds.push_back({{"round", f.id.round},
                     {"fold", f.id.fold},
                     {"n_test", f.n_test},
                     {"n_correct", f.n_correct},
                     {"accuracy", f.metrics.accuracy},
                     {"precision", f.metrics.macro_precision},
                     {"recall", f.metrics.macro_recall},
                     {"f_score", f.metrics.macro_f_score}});
  }
  ordered_json skipped = ordered_json::array();
  for (const auto& id : s.skipped) skipped.push_back({{"round", id.round}, {"fold", id.fold}});
  return {{"accuracy", mean_std_json(s.accuracy)},
          {"precision", mean_std_json(s.precision)},
          {"recall", mean_std_json(s.recall)},
          {"f_score", mean_std_json(s.f_score)},
          {"folds", std::move(folds)},
          {"skipped_folds", std::move(skipped)}};
}

metrics::CvSummary summary_from(const ordered_json& j) {
  metrics::CvSummary s;
  s.accuracy = mean_std_from(j.at("accuracy"));
  s.precision = mean_std_from(j.at("precision"));
  s.recall = mean_std_from(j.at("recall"));
  s.f_score = mean_std_from(j.at("f_score"));
  for (const auto& f : j.at("folds")) {
    metrics::FoldResult r;
    r.id = {f.at("round").get<std::size_t>(), f.at("fold").get<std::size_t>()};
    r.n_test = f.at("n_test").get<std::size_t>();
    r.n_correct = f.at("n_correct").get<std::size_t>();
    r.metrics = {f.at("accuracy").get<double>(), f.at("precision").get<double>(),
                 f.at("recall").get<double>(), f.at("f_score").get<double>()};
    s.folds.push_back(r);
  }
  for (const auto& id : j.at("skipped_folds")) {
    s.skipped.push_back({id.at("round").get<std::size_t>(), id.at("fold").get<std::size_t>()});
  }
  return s;
}

std::string percent(const metrics::MeanStd& v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f (+/- %.2f)", 100.0 * v.mean, 100.0 * v.std);
  return buf;
}

}  // namespace

std::string to_json(const PipelineReport& r, const JsonOptions& options) {
  ordered_json doc;
  doc["schema_version"] = PipelineReport::kSchemaVersion;
  doc["dataset"] = {{"name", r.dataset},
                    {"n_samples", r.n_samples},
                    {"n_genes", r.n_genes},
                    {"n_classes", r.n_classes}};
  doc["protocol"] = to_string(r.config.protocol);
  doc["preprocessing"] = r.preprocessing;
  doc["stage1"] = {{"n_genes", r.stage1_genes.size()}, {"genes", genes_json(r.stage1_genes)}};
  doc["final"] = {{"n_genes", r.final_genes.size()},
                  {"ga_best_fitness", r.ga_best_fitness},
                  {"ga_evaluations", r.ga_evaluations},
                  {"genes", genes_json(r.final_genes)}};
  if (!r.nested_final_sizes.empty()) doc["nested_final_sizes"] = r.nested_final_sizes;
  ordered_json evals = ordered_json::array();
  for (const auto& e : r.evaluations) {
    evals.push_back({{"classifier", classifier_json(e.spec)}, {"summary", summary_json(e.summary)}});
  }
  doc["evaluation"] = std::move(evals);
  if (options.include_runtimes) {
    doc["runtimes_seconds"] = {{"stage1", r.runtimes.stage1},
                               {"stage2", r.runtimes.stage2},
                               {"evaluation", r.runtimes.evaluation}};
  }
  doc["config"] = config_json(r.config);
  doc["complexity_note"] = kComplexityNote;
  return doc.dump(2) + "\n";
}

PipelineReport report_from_json(const std::string& text) {
  try {
    const auto doc = ordered_json::parse(text);
    const int version = doc.at("schema_version").get<int>();
    if (version != PipelineReport::kSchemaVersion) {
      throw ValidationError("unsupported report schema_version " + std::to_string(version));
    }
    PipelineReport r;
    const auto& ds = doc.at("dataset");
    r.dataset = ds.at("name").get<std::string>();
    r.n_samples = ds.at("n_samples").get<std::size_t>();
    r.n_genes = ds.at("n_genes").get<std::size_t>();
    r.n_classes = ds.at("n_classes").get<std::size_t>();
    r.preprocessing = doc.at("preprocessing").get<std::string>();
    r.stage1_genes = genes_from(doc.at("stage1").at("genes"));
    const auto& fin = doc.at("final");
    r.final_genes = genes_from(fin.at("genes"));
    r.ga_best_fitness = fin.at("ga_best_fitness").get<double>();
    r.ga_evaluations = fin.at("ga_evaluations").get<std::size_t>();
    if (doc.contains("nested_final_sizes")) {
      r.nested_final_sizes = doc.at("nested_final_sizes").get<std::vector<std::size_t>>();
    }
    for (const auto& e : doc.at("evaluation")) {
      r.evaluations.push_back({classifier_from(e.at("classifier")), summary_from(e.at("summary"))});
    }
    if (doc.contains("runtimes_seconds")) {
      const auto& t = doc.at("runtimes_seconds");
      r.runtimes = {t.at("stage1").get<double>(), t.at("stage2").get<double>(),
                    t.at("evaluation").get<double>()};
    }
    r.config = config_from(doc.at("config"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed report JSON: ") + e.what());
  }
}

std::string to_markdown(const PipelineReport& r) {
  std::ostringstream out;
  out << "# Gene selection report: " << r.dataset << "\n\n";
  out << "Samples: " << r.n_samples << ", genes: " << r.n_genes << ", classes: " << r.n_classes
      << ", protocol: " << to_string(r.config.protocol) << "\n\n";
  if (!r.preprocessing.empty()) out << "Preprocessing: " << r.preprocessing << "\n\n";

  out << "## Number of selected genes\n\n";
  out << "| All genes | Stage 1 (boosted trees) | Stage 1 + GA |\n";
  out << "|---:|---:|---:|\n";
  out << "| " << r.n_genes << " | " << r.stage1_size() << " | " << r.final_size() << " |\n\n";
  out << "Final genes:";
  for (const auto& g : r.final_genes) out << ' ' << g.id;
  out << "\n\n";

  std::size_t folds = r.evaluations.empty() ? 0 : r.evaluations.front().summary.folds.size();
  out << "## Classification performance (%, mean (+/- std) over " << folds << " folds)\n\n";
  out << "| Classifier | Accuracy | Precision | Recall | F-score |\n";
  out << "|---|---|---|---|---|\n";
  for (const auto& e : r.evaluations) {
    out << "| " << classifiers::to_string(e.spec.kind) << " | " << percent(e.summary.accuracy)
        << " | " << percent(e.summary.precision) << " | " << percent(e.summary.recall) << " | "
        << percent(e.summary.f_score) << " |\n";
  }
  out << "\n## Runtime (s)\n\n";
  out << "| Stage 1 | Stage 2 | Selection total | Evaluation |\n";
  out << "|---:|---:|---:|---:|\n";
  char buf[128];
  std::snprintf(buf, sizeof buf, "| %.3f | %.3f | %.3f | %.3f |\n", r.runtimes.stage1,
                r.runtimes.stage2, r.runtimes.stage1 + r.runtimes.stage2, r.runtimes.evaluation);
  out << buf;
  return out.str();
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  std::error_code ec;
  const auto status = fs::status(target, ec);
  if (fs::exists(status) && !fs::is_regular_file(status)) {
    // Devices and pipes cannot be replaced by a rename; write through them.
    std::ofstream out(target, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << contents;
    out.flush();
    if (!out) throw IoError("write to '" + path + "' failed");
    return;
  }
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(static_cast<unsigned long>(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      throw IoError("write to '" + tmp.string() + "' failed");
    }
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into '" + path + "'");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace genesel::pipeline
