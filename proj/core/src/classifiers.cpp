#include "genesel/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "genesel/error.hpp"

namespace genesel::classifiers {

std::string to_string(Kind kind) {
  switch (kind) {
    case Kind::knn:
      return "knn";
    case Kind::gaussian_nb:
      return "gaussian_nb";
    case Kind::linear_svm:
      return "linear_svm";
  }
  return "unknown";
}

Kind kind_from_string(const std::string& name) {
  if (name == "knn") return Kind::knn;
  if (name == "gaussian_nb" || name == "nb") return Kind::gaussian_nb;
  if (name == "linear_svm" || name == "svm") return Kind::linear_svm;
  throw ConfigError("unknown classifier '" + name + "'");
}

void ClassifierSpec::validate() const {
  if (knn_k < 1) throw ConfigError("knn_k must be >= 1");
  if (!(svm_c > 0.0)) throw ConfigError("svm_c must be > 0");
  if (svm_epochs < 1) throw ConfigError("svm_epochs must be >= 1");
  if (!(nb_var_smoothing >= 0.0)) throw ConfigError("nb_var_smoothing must be >= 0");
}

ClassIndex knn_vote(const Matrix& train_x, std::span<const ClassIndex> train_y,
                    std::size_t n_classes, std::span<const double> query, std::size_t k) {
  const std::size_t m = train_x.rows();
  k = std::min(k, m);
  std::vector<std::pair<double, std::size_t>> dist(m);
  for (std::size_t i = 0; i < m; ++i) {
    auto row = train_x.row(i);
    double d = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double diff = row[j] - query[j];
      d += diff * diff;
    }
    dist[i] = {d, i};
  }
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

  std::vector<std::size_t> votes(n_classes, 0);
  std::vector<double> nearest(n_classes, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < k; ++i) {
    const auto c = static_cast<std::size_t>(train_y[dist[i].second]);
    ++votes[c];
    nearest[c] = std::min(nearest[c], dist[i].first);
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < n_classes; ++c) {
    if (votes[c] > votes[best] || (votes[c] == votes[best] && nearest[c] < nearest[best])) {
      best = c;
    }
  }
  return static_cast<ClassIndex>(best);
}

namespace {

GaussianNbModel train_nb(const ClassifierSpec& spec, const Dataset& ds) {
  const std::size_t m = ds.n_samples();
  const std::size_t n = ds.n_genes();
  const std::size_t c_count = ds.n_classes();
  GaussianNbModel model;
  model.mean.assign(c_count, std::vector<double>(n, 0.0));
  model.variance.assign(c_count, std::vector<double>(n, 0.0));
  std::vector<std::size_t> count(c_count, 0);
  for (std::size_t i = 0; i < m; ++i) {
    const auto c = static_cast<std::size_t>(ds.labels()[i]);
    ++count[c];
    auto row = ds.values().row(i);
    for (std::size_t j = 0; j < n; ++j) model.mean[c][j] += row[j];
  }
  for (std::size_t c = 0; c < c_count; ++c) {
    if (count[c] == 0) continue;
    for (double& v : model.mean[c]) v /= static_cast<double>(count[c]);
  }
  for (std::size_t i = 0; i < m; ++i) {
    const auto c = static_cast<std::size_t>(ds.labels()[i]);
    auto row = ds.values().row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double d = row[j] - model.mean[c][j];
      model.variance[c][j] += d * d;
    }
  }

  // Floor = smoothing * largest per-gene variance over all samples.
  double max_var = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double mu = 0.0;
    for (std::size_t i = 0; i < m; ++i) mu += ds.values()(i, j);
    mu /= static_cast<double>(m);
    double var = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double d = ds.values()(i, j) - mu;
      var += d * d;
    }
    max_var = std::max(max_var, var / static_cast<double>(m));
  }
  model.variance_floor = spec.nb_var_smoothing * max_var;
  if (!(model.variance_floor > 0.0)) model.variance_floor = std::numeric_limits<double>::min();

  model.log_prior.assign(c_count, -std::numeric_limits<double>::infinity());
  for (std::size_t c = 0; c < c_count; ++c) {
    if (count[c] > 0) {
      model.log_prior[c] = std::log(static_cast<double>(count[c]) / static_cast<double>(m));
    }
    for (double& v : model.variance[c]) {
      v = count[c] > 0 ? v / static_cast<double>(count[c]) : 0.0;
      v = std::max(v, model.variance_floor);
    }
  }
  return model;
}

// Pegasos-style primal subgradient descent on
//   (lambda/2) ||w||^2 + (1/M) sum hinge(y_i (w.x_i + b)),  lambda = 1 / (C M),
// i.e. the C-weighted hinge objective divided by C M. The bias is treated as
// the weight of a constant feature.
std::pair<std::vector<double>, double> train_binary_svm(const Matrix& x,
                                                        const std::vector<double>& y,
                                                        const ClassifierSpec& spec,
                                                        std::uint64_t stream) {
  const std::size_t m = x.rows();
  const std::size_t n = x.cols();
  const double lambda = 1.0 / (spec.svm_c * static_cast<double>(m));
  const double radius = 1.0 / std::sqrt(lambda);
  std::vector<double> w(n, 0.0);
  double b = 0.0;
  std::vector<double> w_avg(n, 0.0);
  double b_avg = 0.0;
  std::size_t averaged = 0;

  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::mt19937_64 rng(seq);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});

  // Iterates of the final half of training are averaged.
  const std::size_t average_from = spec.svm_epochs / 2;
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < spec.svm_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      auto row = x.row(i);
      double margin = b;
      for (std::size_t j = 0; j < n; ++j) margin += w[j] * row[j];
      margin *= y[i];
      const double shrink = 1.0 - eta * lambda;
      for (double& wj : w) wj *= shrink;
      b *= shrink;
      if (margin < 1.0) {
        for (std::size_t j = 0; j < n; ++j) w[j] += eta * y[i] * row[j];
        b += eta * y[i];
      }
      double norm2 = b * b;
      for (double wj : w) norm2 += wj * wj;
      if (norm2 > radius * radius) {
        const double scale = radius / std::sqrt(norm2);
        for (double& wj : w) wj *= scale;
        b *= scale;
      }
      if (epoch >= average_from) {
        for (std::size_t j = 0; j < n; ++j) w_avg[j] += w[j];
        b_avg += b;
        ++averaged;
      }
    }
  }
  for (double& v : w_avg) v /= static_cast<double>(averaged);
  b_avg /= static_cast<double>(averaged);
  return {std::move(w_avg), b_avg};
}

LinearSvmModel train_svm(const ClassifierSpec& spec, const Dataset& ds) {
  LinearSvmModel model;
  model.n_classes = ds.n_classes();
  const std::size_t scorers = model.n_classes == 2 ? 1 : model.n_classes;
  for (std::size_t c = 0; c < scorers; ++c) {
    const auto positive = static_cast<ClassIndex>(model.n_classes == 2 ? 1 : c);
    std::vector<double> y(ds.n_samples());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = ds.labels()[i] == positive ? 1.0 : -1.0;
    auto [w, b] = train_binary_svm(ds.values(), y, spec, c);
    model.weights.push_back(std::move(w));
    model.bias.push_back(b);
  }
  return model;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TrainedClassifier train(const ClassifierSpec& spec, const Dataset& ds) {
  spec.validate();
  if (ds.n_samples() == 0) throw ValidationError("cannot train on zero samples");
  if (ds.n_samples() < ds.n_classes()) {
    throw ValidationError("fewer samples than classes");
  }
  switch (spec.kind) {
    case Kind::knn: {
      if (spec.knn_k > ds.n_samples()) {
        throw ValidationError("knn_k = " + std::to_string(spec.knn_k) + " exceeds " +
                              std::to_string(ds.n_samples()) + " training samples");
      }
      KnnModel model{ds.values(), ds.labels(), spec.knn_k, ds.n_classes()};
      return {std::move(model), ds.n_genes(), ds.n_classes()};
    }
    case Kind::gaussian_nb:
      return {train_nb(spec, ds), ds.n_genes(), ds.n_classes()};
    case Kind::linear_svm:
      return {train_svm(spec, ds), ds.n_genes(), ds.n_classes()};
  }
  throw ConfigError("unknown classifier kind");
}

std::vector<ClassIndex> TrainedClassifier::predict(const Matrix& x) const {
  if (x.cols() != n_genes_) {
    throw ValidationError("classifier expects " + std::to_string(n_genes_) + " genes, data has " +
                          std::to_string(x.cols()));
  }
  std::vector<ClassIndex> out(x.rows(), 0);
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        for (std::size_t i = 0; i < x.rows(); ++i) {
          auto q = x.row(i);
          if constexpr (std::is_same_v<T, KnnModel>) {
            out[i] = knn_vote(m.x, m.y, m.n_classes, q, m.k);
          } else if constexpr (std::is_same_v<T, GaussianNbModel>) {
            std::size_t best = 0;
            double best_score = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < m.log_prior.size(); ++c) {
              double s = m.log_prior[c];
              for (std::size_t j = 0; j < q.size(); ++j) {
                const double var = m.variance[c][j];
                const double d = q[j] - m.mean[c][j];
                s -= 0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
              }
              if (s > best_score) {
                best_score = s;
                best = c;
              }
            }
            out[i] = static_cast<ClassIndex>(best);
          } else {
            if (m.n_classes == 2) {
              out[i] = dot(m.weights[0], q) + m.bias[0] > 0.0 ? 1 : 0;
            } else {
              std::size_t best = 0;
              double best_score = -std::numeric_limits<double>::infinity();
              for (std::size_t c = 0; c < m.weights.size(); ++c) {
                const double s = dot(m.weights[c], q) + m.bias[c];
                if (s > best_score) {
                  best_score = s;
                  best = c;
                }
              }
              out[i] = static_cast<ClassIndex>(best);
            }
          }
        }
      },
      model_);
  return out;
}

}  // namespace genesel::classifiers
