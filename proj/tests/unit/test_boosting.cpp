#include <doctest.h>

#include <cmath>
#include <random>

#include "genesel/boosting.hpp"
#include "genesel/error.hpp"
#include "oracles.hpp"

using namespace genesel;
using namespace genesel::boosting;

namespace {

void check_same_tree(const Tree& got, const std::vector<oracle::Node>& want) {
  REQUIRE(got.nodes.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    const auto& a = got.nodes[i];
    const auto& b = want[i];
    CHECK(a.feature == b.feature);
    if (b.feature >= 0) {
      CHECK(a.threshold == b.threshold);
      CHECK(a.left == b.left);
      CHECK(a.right == b.right);
      CHECK(a.gain == doctest::Approx(b.gain).epsilon(1e-9));
    } else {
      CHECK(std::abs(a.weight - b.weight) <= 1e-9);
    }
  }
}

Dataset separable_one_gene(std::size_t m, std::size_t n, std::size_t informative, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  Matrix x(m, n);
  std::vector<ClassIndex> y(m);
  for (std::size_t i = 0; i < m; ++i) {
    y[i] = static_cast<ClassIndex>(i % 2);
    for (std::size_t j = 0; j < n; ++j) x(i, j) = u(rng);
    x(i, informative) = y[i] == 1 ? 0.6 + 0.4 * u(rng) : 0.4 * u(rng);
  }
  std::vector<std::string> ids(n);
  for (std::size_t j = 0; j < n; ++j) ids[j] = "g" + std::to_string(j);
  return Dataset(x, y, ids, {"a", "b"});
}

}  // namespace

TEST_CASE("grad_hess: logistic at r=0, squared at zero residual") {
  const auto l = grad_hess(Loss::logistic, 1.0, 0.0);
  CHECK(l.g == -0.5);
  CHECK(l.h == 0.25);
  const auto s = grad_hess(Loss::squared, 2.0, 2.0);
  CHECK(s.g == 0.0);
  CHECK(s.h == 1.0);
}

TEST_CASE("grad_hess: matches central differences of the loss") {
  for (Loss loss : {Loss::logistic, Loss::squared}) {
    for (double y : {0.0, 1.0}) {
      for (double r = -4.0; r <= 4.0; r += 0.37) {
        auto f = [&](double t) { return loss_value(loss, y, t); };
        auto df = [&](double t) { return grad_hess(loss, y, t).g; };
        const auto gh = grad_hess(loss, y, r);
        CHECK(std::abs(gh.g - oracle::central_diff(f, r, 1e-5)) < 1e-6);
        CHECK(std::abs(gh.h - oracle::central_diff(df, r, 1e-5)) < 1e-4);
      }
    }
  }
  auto f = [](double t) { return loss_value(Loss::logistic, 0.0, t); };
  CHECK(std::abs(grad_hess(Loss::logistic, 0.0, 0.7).g - oracle::central_diff(f, 0.7, 1e-5)) < 1e-6);
}

TEST_CASE("grad_hess: logistic hessian stays positive for extreme scores") {
  CHECK(grad_hess(Loss::logistic, 1.0, 800.0).h >= kMinHessian);
  CHECK(std::isfinite(loss_value(Loss::logistic, 0.0, 800.0)));
}

TEST_CASE("loss names round-trip; unknown name is a config error") {
  CHECK(loss_from_string(to_string(Loss::squared)) == Loss::squared);
  CHECK(loss_from_string(to_string(Loss::logistic)) == Loss::logistic);
  CHECK_THROWS_AS(loss_from_string("hinge"), ConfigError);
}

TEST_CASE("leaf_weight: closed form and degenerate case") {
  CHECK(leaf_weight(4, 2, 1) == -4.0 / 3.0);
  CHECK(leaf_weight(0, 7, 3) == 0.0);
  CHECK(leaf_weight(0, 0, 1) == 0.0);
  CHECK_THROWS_AS(leaf_weight(1, 0, 0), DegenerateLeafError);
}

TEST_CASE("leaf_weight: agrees with numeric minimization of the quadratic") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> g(-50, 50), h(0.01, 40), lam(0, 5);
  for (int t = 0; t < 1000; ++t) {
    const double G = g(rng), H = h(rng), L = lam(rng);
    CHECK(std::abs(leaf_weight(G, H, L) - oracle::argmin_leaf(G, H, L)) <= 1e-9);
    CHECK(std::abs(leaf_weight(G, H, L) - oracle::ternary_argmin_leaf(G, H, L)) <= 1e-5);
  }
}

TEST_CASE("split_gain: symmetric split is worth -gamma without regularization; worked example") {
  CHECK(split_gain(1.5, 2, 1.5, 2, 0, 0.3) == doctest::Approx(-0.3).epsilon(1e-15));
  CHECK(split_gain(0, 2, 0, 2, 1, 0.3) == -0.3);
  // With lambda > 0 halving the data still costs regularization:
  // 1/2 (0.75 + 0.75 - 1.8) - 0.3.
  CHECK(split_gain(1.5, 2, 1.5, 2, 1, 0.3) == doctest::Approx(-0.45).epsilon(1e-15));
  CHECK(split_gain(-2, 1, 2, 1, 1, 0) == 2.0);
}

TEST_CASE("split_gain: equals the direct objective difference") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> g(-20, 20), h(0, 30), lam(0.01, 4), gam(0, 2);
  for (int t = 0; t < 1000; ++t) {
    const double gl = g(rng), hl = h(rng), gr = g(rng), hr = h(rng), l = lam(rng), c = gam(rng);
    CHECK(std::abs(split_gain(gl, hl, gr, hr, l, c) - oracle::objective_drop(gl, hl, gr, hr, l, c)) <=
          1e-9);
  }
}

TEST_CASE("fit: identical to the exhaustive oracle on an 8x3 instance, depth 2") {
  Matrix x(8, 3, std::vector<double>{0.1, 3, 5, 0.4, 1, 5, 0.2, 2, 4, 0.9, 0, 4,
                                     0.5, 3, 1, 0.7, 1, 2, 0.3, 0, 3, 0.8, 2, 1});
  const std::vector<double> y{1.0, 2.5, 0.3, -1.0, 4.0, 2.2, -0.5, 0.0};
  BoostParams p;
  p.loss = Loss::squared;
  p.subsample = 1.0;
  p.max_depth = 2;
  p.n_estimators = 3;
  p.lambda = 0.5;
  const auto model = fit(x, {y}, p);
  const auto want = oracle::fit_squared(x, y, p);
  for (std::size_t t = 0; t < want.size(); ++t) check_same_tree(model.trees[t][0], want[t]);
}

TEST_CASE("fit: random small instances match the oracle") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> grid(0, 4);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 2 + trial % 9, n = 1 + trial % 4;
    Matrix x(m, n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) x(i, j) = trial % 2 ? grid(rng) : z(rng);
    std::vector<double> y(m);
    for (auto& v : y) v = z(rng);
    BoostParams p;
    p.loss = Loss::squared;
    p.subsample = 1.0;
    p.max_depth = 1 + trial % 2;
    p.n_estimators = 1 + trial % 3;
    p.lambda = (trial % 3) * 0.5;
    p.gamma = (trial % 4 == 0) ? 0.1 : 0.0;
    p.learning_rate = 0.3;
    const auto model = fit(x, {y}, p);
    const auto want = oracle::fit_squared(x, y, p);
    for (std::size_t t = 0; t < want.size(); ++t) check_same_tree(model.trees[t][0], want[t]);
  }
}

TEST_CASE("fit: least-squares stump has the child means as leaves") {
  Matrix x(6, 1, std::vector<double>{1, 2, 3, 10, 11, 12});
  const std::vector<double> y{1, 2, 3, 7, 8, 9};
  BoostParams p;
  p.loss = Loss::squared;
  p.n_estimators = 1;
  p.max_depth = 1;
  p.lambda = 0;
  p.subsample = 1;
  p.learning_rate = 1;
  const auto model = fit(x, {y}, p);
  const Tree& t = model.trees[0][0];
  REQUIRE(t.nodes.size() == 3);
  CHECK(t.nodes[0].threshold == 6.5);
  CHECK(model.base_score[0] + t.nodes[1].weight == doctest::Approx(2.0));
  CHECK(model.base_score[0] + t.nodes[2].weight == doctest::Approx(8.0));
  const auto pred = predict_value(model, x);
  CHECK(pred[0] == doctest::Approx(2.0));
  CHECK(pred[5] == doctest::Approx(8.0));
}

TEST_CASE("fit: separable two-class toy is learned exactly") {
  const auto ds = separable_one_gene(40, 5, 3, 8);
  const auto model = fit(ds, BoostParams{});
  CHECK(predict_class(model, ds) == ds.labels());
  const auto imp = importances(model);
  CHECK(imp.ranking.front() == 3);
  CHECK(imp.total_gain[3] > 0.0);
}

TEST_CASE("fit: three classes use one output per class") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z(0, 0.1);
  Matrix x(30, 2);
  std::vector<ClassIndex> y(30);
  for (std::size_t i = 0; i < 30; ++i) {
    y[i] = static_cast<ClassIndex>(i % 3);
    x(i, 0) = y[i] + z(rng);
    x(i, 1) = z(rng);
  }
  Dataset ds(x, y, {"a", "b"}, {"p", "q", "r"});
  const auto model = fit(ds, BoostParams{});
  CHECK(model.n_outputs == 3);
  CHECK(model.trees.front().size() == 3);
  CHECK(predict_class(model, ds) == y);
}

TEST_CASE("fit: constant features give single-leaf trees") {
  Dataset ds(Matrix(4, 2, 1.0), {0, 1, 0, 1}, {"a", "b"}, {"p", "q"});
  const auto model = fit(ds, BoostParams{});
  for (const auto& round : model.trees) CHECK(round[0].nodes.size() == 1);
  const auto imp = importances(model);
  CHECK(imp.total_gain == std::vector<double>{0, 0});
  CHECK(imp.ranking == std::vector<GeneIndex>{0, 1});
  CHECK_THROWS_AS(select_nonzero(imp), EmptySelectionError);
}

TEST_CASE("fit: NaN input and bad targets are rejected") {
  Matrix x(2, 1, std::vector<double>{0.0, std::nan("")});
  CHECK_THROWS_AS(fit(x, {{0, 1}}, BoostParams{}), ValidationError);
  CHECK_THROWS_AS(fit(Matrix(2, 1), {{0, 2}}, BoostParams{}), ValidationError);
}

TEST_CASE("params: validation") {
  BoostParams p;
  p.subsample = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.max_depth = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.learning_rate = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.lambda = -1;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("fit: invariants on random data with subsampling") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> z;
  Matrix x(25, 6);
  std::vector<ClassIndex> y(25);
  for (std::size_t i = 0; i < 25; ++i) {
    y[i] = static_cast<ClassIndex>(i % 2);
    for (std::size_t j = 0; j < 6; ++j) x(i, j) = z(rng);
  }
  Dataset ds(x, y, {"a", "b", "c", "d", "e", "f"}, {"p", "q"});
  BoostParams p;
  p.n_estimators = 20;
  p.max_depth = 3;
  const auto model = fit(ds, p);
  const auto imp = importances(model);
  std::vector<double> used(6, 0.0);
  for (const auto& round : model.trees) {
    const Tree& t = round[0];
    CHECK(t.depth() <= 3);
    for (const auto& node : t.nodes) {
      if (node.is_leaf()) {
        CHECK(std::isfinite(node.weight));
      } else {
        CHECK(node.feature < 6);
        CHECK(node.gain > 0.0);
        used[static_cast<std::size_t>(node.feature)] = 1;
      }
    }
  }
  for (std::size_t g = 0; g < 6; ++g) {
    CHECK(imp.total_gain[g] >= 0.0);
    if (used[g] == 0) CHECK(imp.total_gain[g] == 0.0);
  }
  std::vector<GeneIndex> sorted = imp.ranking;
  std::ranges::sort(sorted);
  CHECK(sorted == std::vector<GeneIndex>{0, 1, 2, 3, 4, 5});
  for (const auto& row : model.predict_raw(x))
    for (double v : row) CHECK(std::isfinite(v));
  CHECK(fit(ds, p) == model);
}

TEST_CASE("predict: tie rule, manual stump and gene-count mismatch") {
  BoostedEnsemble zero;
  zero.n_genes = 1;
  zero.base_score = {0.0};
  zero.trees = {{Tree{{TreeNode{}}}}};
  const auto tied = predict_class(zero, Matrix(3, 1));
  CHECK(tied == std::vector<ClassIndex>{0, 0, 0});

  BoostedEnsemble stump;
  stump.n_genes = 2;
  stump.base_score = {0.0};
  stump.params.learning_rate = 1.0;
  Tree t;
  t.nodes = {TreeNode{0, 0.5, 1, 2, 0, 1}, TreeNode{.weight = -2}, TreeNode{.weight = 2}};
  stump.trees = {{t}};
  const auto cls = predict_class(stump, Matrix(2, 2, std::vector<double>{0.3, 0, 0.9, 0}));
  CHECK(cls == std::vector<ClassIndex>{0, 1});
  CHECK_THROWS_AS(predict_class(stump, Matrix(1, 3)), ValidationError);
}

TEST_CASE("importance: single split on gene 5 with gain 2") {
  BoostedEnsemble m;
  m.n_genes = 8;
  m.base_score = {0.0};
  Tree t;
  t.nodes = {TreeNode{5, 0.5, 1, 2, 0, 2.0}, TreeNode{}, TreeNode{}};
  m.trees = {{t}};
  const auto imp = importances(m);
  for (std::size_t g = 0; g < 8; ++g) CHECK(imp.total_gain[g] == (g == 5 ? 2.0 : 0.0));
  CHECK(imp.ranking.front() == 5);
  CHECK(imp.split_count[5] == 1);
}

TEST_CASE("select_nonzero: keeps strictly positive gains") {
  ImportanceReport r;
  r.total_gain = {0, 1.5, 0, 0.2};
  CHECK(select_nonzero(r) == GeneSubset{1, 3});
  r.total_gain = {0, 0};
  CHECK_THROWS_AS(select_nonzero(r), EmptySelectionError);
}

TEST_CASE("select_nonzero: leukemia-shaped run keeps tens of genes") {
  // 72 samples x 7129 genes, a handful of informative ones.
  const std::size_t m = 72, n = 7129;
  std::mt19937_64 rng(99);
  std::normal_distribution<double> z;
  Matrix x(m, n);
  std::vector<ClassIndex> y(m);
  for (std::size_t i = 0; i < m; ++i) {
    y[i] = i < 47 ? 0 : 1;
    for (std::size_t j = 0; j < n; ++j) x(i, j) = z(rng);
    for (std::size_t j : {10, 500, 2000, 4000, 7000}) x(i, j) += 1.5 * y[i];
  }
  std::vector<std::string> ids(n);
  for (std::size_t j = 0; j < n; ++j) ids[j] = "g" + std::to_string(j);
  Dataset ds(x, y, ids, {"ALL", "AML"});
  const auto genes = select_nonzero(importances(fit(ds, BoostParams{})));
  CHECK(genes.size() >= 5);
  CHECK(genes.size() <= 200);
}

TEST_CASE("json: model round-trips exactly") {
  const auto ds = separable_one_gene(20, 4, 1, 3);
  BoostParams p;
  p.n_estimators = 5;
  const auto model = fit(ds, p);
  const auto back = ensemble_from_json(to_json(model));
  CHECK(back == model);
  CHECK(to_json(back) == to_json(model));
}
