#include <doctest.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "genesel/pipeline.hpp"

namespace fs = std::filesystem;
using genesel::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("genesel_cli_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

const std::vector<std::string> kFast = {"--trees", "20", "--pop", "12", "--gens", "5",
                                        "--cv-k", "5", "--cv-rounds", "1"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("cli: help exits 0, unknown flag and missing subcommand exit 1") {
  CHECK(call({"--help"}).code == 0);
  const auto bad = call({"select", "--bogus"});
  CHECK(bad.code == 1);
  CHECK(!bad.err.empty());
  CHECK(call({}).code == 1);
}

TEST_CASE("cli: synth then select writes report, markdown and trace") {
  TempDir dir;
  const auto data = dir / "d.csv";
  REQUIRE(call({"synth", "--samples", "40", "--genes", "80", "--informative", "4", "--out", data,
                "--truth-out", dir / "truth.json"})
              .code == 0);
  const auto r = call(with({"select", "--data", data, "--seed", "7", "--out", dir / "report.json",
                            "--trace-out", dir / "trace.csv"},
                           kFast));
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "report.md"));
  const auto report = genesel::pipeline::report_from_json(genesel::pipeline::read_file(dir / "report.json"));
  CHECK(report.n_genes == 80);
  CHECK(genesel::pipeline::read_file(dir / "trace.csv").rfind("generation,best_fitness", 0) == 0);
  CHECK(r.err.find("select:") != std::string::npos);
}

TEST_CASE("cli: rank on an absent file exits 2") {
  CHECK(call({"rank", "--data", "/nonexistent/missing.csv"}).code == 2);
}

TEST_CASE("cli: ragged CSV exits 1 with the line number") {
  TempDir dir;
  std::ofstream(dir / "bad.csv") << "a,b,class\n1,2,A\n3,B\n";
  const auto r = call({"rank", "--data", dir / "bad.csv"});
  CHECK(r.code == 1);
  CHECK(r.err.find("line 3") != std::string::npos);
}

TEST_CASE("cli: rank emits csv and json") {
  TempDir dir;
  const auto data = dir / "d.csv";
  REQUIRE(call({"synth", "--samples", "30", "--genes", "20", "--out", data}).code == 0);
  const auto csv = call({"rank", "--data", data, "--format", "csv", "--trees", "10"});
  CHECK(csv.code == 0);
  CHECK(csv.out.rfind("rank,index,id,total_gain,split_count\n", 0) == 0);
  const auto json = call({"rank", "--data", data, "--trees", "10", "--model-out", dir / "m.json"});
  CHECK(json.code == 0);
  CHECK(json.out.find("\"genes\"") != std::string::npos);
  CHECK(fs::exists(dir / "m.json"));
}

TEST_CASE("cli: missing values are imputed before selection") {
  TempDir dir;
  const auto data = dir / "d.csv";
  REQUIRE(call({"synth", "--samples", "30", "--genes", "40", "--missing-fraction", "0.05", "--out",
                data})
              .code == 0);
  CHECK(genesel::pipeline::read_file(data).find("NA") != std::string::npos);
  const auto r = call(with({"select", "--data", data, "--out", dir / "r.json"}, kFast));
  CHECK(r.code == 0);
  CHECK(genesel::pipeline::read_file(dir / "r.json").find("knn imputation") != std::string::npos);
}

TEST_CASE("cli: evaluate accepts a report or a gene list") {
  TempDir dir;
  const auto data = dir / "d.csv";
  REQUIRE(call({"synth", "--samples", "30", "--genes", "30", "--out", data}).code == 0);
  REQUIRE(call(with({"select", "--data", data, "--out", dir / "r.json"}, kFast)).code == 0);
  const auto from_report = call({"evaluate", "--data", data, "--genes", dir / "r.json", "--cv-rounds", "1"});
  CHECK(from_report.code == 0);
  CHECK(from_report.out.find("| linear_svm |") != std::string::npos);
  std::ofstream(dir / "genes.txt") << "g00 g03\n5\n";
  const auto from_list = call({"evaluate", "--data", data, "--genes", dir / "genes.txt",
                               "--classifiers", "knn,nb", "--out", dir / "e.json"});
  CHECK(from_list.code == 0);
  CHECK(from_list.out.find("| knn |") != std::string::npos);
  CHECK(fs::exists(dir / "e.json"));
  std::ofstream(dir / "unknown.txt") << "nope\n";
  CHECK(call({"evaluate", "--data", data, "--genes", dir / "unknown.txt"}).code == 1);
}

TEST_CASE("cli: config file supplies defaults; command line wins") {
  TempDir dir;
  const auto data = dir / "d.csv";
  REQUIRE(call({"synth", "--samples", "30", "--genes", "30", "--out", data}).code == 0);
  std::ofstream(dir / "run.conf") << "# fast run\ntrees = 15\npop=10\ngens=3\ncv-k=3\ncv-rounds=1\nseed=4\n";
  REQUIRE(call({"select", "--data", data, "--config", dir / "run.conf", "--seed", "5", "--out",
                dir / "r.json"})
              .code == 0);
  const auto r = genesel::pipeline::report_from_json(genesel::pipeline::read_file(dir / "r.json"));
  CHECK(r.config.boost.n_estimators == 15);
  CHECK(r.config.ga.population_size == 10);
  CHECK(r.config.seed == 5);

  std::ofstream(dir / "run.json") << R"({"trees": 12, "pop": 10, "gens": 2, "cv-k": 3, "cv-rounds": 1, "classifiers": ["knn"]})";
  REQUIRE(call({"select", "--data", data, "--config", dir / "run.json", "--out", dir / "r2.json"}).code == 0);
  const auto r2 = genesel::pipeline::report_from_json(genesel::pipeline::read_file(dir / "r2.json"));
  CHECK(r2.config.boost.n_estimators == 12);
  REQUIRE(r2.config.eval_classifiers.size() == 1);
  CHECK(r2.config.eval_classifiers[0].kind == genesel::classifiers::Kind::knn);

  CHECK(call({"select", "--data", data, "--config", dir / "absent.conf"}).code == 2);
  std::ofstream(dir / "broken.conf") << "trees\n";
  CHECK(call({"select", "--data", data, "--config", dir / "broken.conf"}).code == 1);
}

TEST_CASE("cli: out-of-range parameters are validation errors") {
  TempDir dir;
  const auto data = dir / "d.csv";
  REQUIRE(call({"synth", "--samples", "20", "--genes", "10", "--out", data}).code == 0);
  CHECK(call({"select", "--data", data, "--subsample", "0"}).code == 1);
  CHECK(call({"select", "--data", data, "--loss", "hinge"}).code == 1);
}

TEST_CASE("cli: compare prints a Wilcoxon table over report directories") {
  TempDir dir;
  fs::create_directories(dir / "a");
  fs::create_directories(dir / "b");
  for (int i = 0; i < 6; ++i) {
    const auto data = dir / ("set" + std::to_string(i) + ".csv");
    REQUIRE(call({"synth", "--samples", "30", "--genes", "30", "--seed", std::to_string(i), "--out", data}).code == 0);
    REQUIRE(call(with({"select", "--data", data, "--seed", "1", "--out",
                       dir / ("a/set" + std::to_string(i) + ".json")},
                      kFast))
                .code == 0);
    REQUIRE(call({"select", "--data", data, "--seed", "1", "--trees", "20", "--pop", "4", "--gens",
                  "0", "--cv-k", "5", "--cv-rounds", "1", "--out",
                  dir / ("b/set" + std::to_string(i) + ".json")})
                .code == 0);
  }
  const auto r = call({"compare", "--a", dir / "a", "--b", dir / "b", "--out", dir / "cmp.json"});
  CHECK(r.code == 0);
  CHECK(r.out.find("| Classifier | Datasets | W | p-value |") != std::string::npos);
  CHECK(r.out.find("| linear_svm | 6 |") != std::string::npos);
  CHECK(fs::exists(dir / "cmp.json"));
  CHECK(call({"compare", "--a", dir / "a", "--b", dir / "nope"}).code == 2);
}

TEST_CASE("cli: trace subcommand writes the GA trace") {
  TempDir dir;
  const auto data = dir / "d.csv";
  REQUIRE(call({"synth", "--samples", "20", "--genes", "15", "--out", data}).code == 0);
  const auto r = call({"trace", "--data", data, "--trees", "10", "--pop", "6", "--gens", "4"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("generation,best_fitness,mean_fitness,best_size\n", 0) == 0);
  std::size_t lines = 0;
  for (char c : r.out) lines += c == '\n';
  CHECK(lines == 6);
}
