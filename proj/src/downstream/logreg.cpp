#include "mlr/downstream/logreg.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace mlr::downstream {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

Eigen::Map<const RowMat> as_matrix(const TensorD& x) {
  return {x.data(), static_cast<Eigen::Index>(x.dim(0)), static_cast<Eigen::Index>(x.dim(1))};
}

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1 / (1 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1 + e);
}

void check_inputs(const TensorD& x, const std::vector<int>& y, const std::string& task) {
  if (x.rank() != 2) throw ShapeError("logistic regression expects [B,K] embeddings, got " + shape_str(x.dims()));
  if (y.size() != x.dim(0)) {
    throw ShapeError("task '" + task + "': " + std::to_string(y.size()) + " labels for " +
                     std::to_string(x.dim(0)) + " embeddings");
  }
  std::size_t pos = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw ConfigError("task '" + task + "': labels must be 0 or 1");
    pos += v;
  }
  if (y.size() < 2 || pos == 0 || pos == y.size()) {
    throw TrainingError("task '" + task + "': labels contain a single class (" + std::to_string(pos) +
                        " positive of " + std::to_string(y.size()) + ")");
  }
}

// theta = [w; b]
struct Objective {
  Eigen::Map<const RowMat> x;
  Vec y;
  double lambda;

  double value(const Vec& theta, Vec* grad, RowMat* hess) const {
    const auto k = x.cols();
    const Vec z = (x * theta.head(k)).array() + theta[k];
    double f = 0;
    Vec r(z.size()), s(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      f += softplus(z[i]) - y[i] * z[i];
      const double p = sigmoid(z[i]);
      r[i] = p - y[i];
      s[i] = p * (1 - p);
    }
    const double n = static_cast<double>(x.rows());
    f = f / n + 0.5 * lambda * theta.head(k).squaredNorm();
    if (grad) {
      grad->resize(k + 1);
      grad->head(k) = x.transpose() * r / n + lambda * theta.head(k);
      (*grad)[k] = r.sum() / n;
    }
    if (hess) {
      hess->setZero(k + 1, k + 1);
      const RowMat xs = x.array().colwise() * s.array();
      hess->topLeftCorner(k, k) = x.transpose() * xs / n;
      hess->topLeftCorner(k, k).diagonal().array() += lambda;
      const Vec cross = xs.colwise().sum().transpose() / n;
      hess->col(k).head(k) = cross;
      hess->row(k).head(k) = cross.transpose();
      (*hess)(k, k) = s.sum() / n;
    }
    return f;
  }
};

}  // namespace

void LogRegConfig::validate() const {
  if (!(C > 0) || !std::isfinite(C)) throw ConfigError("logreg C must be positive and finite");
  if (max_iter == 0) throw ConfigError("logreg max_iter must be positive");
  if (!(tol > 0)) throw ConfigError("logreg tol must be positive");
}

const TaskModel& LogRegModel::task(const std::string& name) const {
  for (const auto& t : tasks)
    if (t.name == name) return t;
  throw ConfigError("no classifier task named '" + name + "'");
}

double logreg_objective(const TensorD& x, const std::vector<int>& y, const std::vector<double>& w,
                        double b, double C, std::vector<double>* grad_w, double* grad_b) {
  if (w.size() != x.dim(1)) throw ShapeError("logreg weights do not match embedding width");
  Objective obj{as_matrix(x), Vec(y.size()), 1 / (C * static_cast<double>(x.dim(0)))};
  for (std::size_t i = 0; i < y.size(); ++i) obj.y[i] = y[i];
  Vec theta(w.size() + 1);
  for (std::size_t j = 0; j < w.size(); ++j) theta[j] = w[j];
  theta[w.size()] = b;
  Vec g;
  const double f = obj.value(theta, (grad_w || grad_b) ? &g : nullptr, nullptr);
  if (grad_w) grad_w->assign(g.data(), g.data() + w.size());
  if (grad_b) *grad_b = g[w.size()];
  return f;
}

TaskModel train_logreg(const TensorD& x, const std::vector<int>& y, const LogRegConfig& config,
                       const std::string& task) {
  config.validate();
  check_inputs(x, y, task);
  if (!x.all_finite()) throw NumericError("task '" + task + "': non-finite embeddings");
  const auto k = static_cast<Eigen::Index>(x.dim(1));
  Objective obj{as_matrix(x), Vec(y.size()), 1 / (config.C * static_cast<double>(x.dim(0)))};
  for (std::size_t i = 0; i < y.size(); ++i) obj.y[i] = y[i];

  Vec theta = Vec::Zero(k + 1), grad;
  RowMat hess;
  const bool newton = config.solver == Solver::newton;
  double f = obj.value(theta, &grad, newton ? &hess : nullptr);
  Convergence rep;
  rep.objective_history.push_back(f);
  double step = 1;
  while (true) {
    rep.grad_norm = grad.lpNorm<Eigen::Infinity>();
    if (rep.grad_norm < config.tol) {
      rep.converged = true;
      break;
    }
    if (rep.iterations >= config.max_iter) break;

    Vec dir = -grad;
    if (newton) {
      Eigen::LDLT<RowMat> ldlt(hess);
      if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        Vec d = -ldlt.solve(grad);
        if (d.allFinite() && d.dot(grad) < 0) dir = d;
      }
      step = 1;
    } else {
      step = std::min(1.0, step * 2);
    }
    // Armijo backtracking
    const double slope = grad.dot(dir);
    Vec next;
    double f_next = f;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings, step *= 0.5) {
      next = theta + step * dir;
      f_next = obj.value(next, nullptr, nullptr);
      if (f_next <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // no representable decrease left
    theta = next;
    f = obj.value(theta, &grad, newton ? &hess : nullptr);
    ++rep.iterations;
    rep.objective_history.push_back(f);
  }
  rep.objective = f;

  TaskModel m;
  m.name = task;
  m.w.assign(theta.data(), theta.data() + k);
  m.b = theta[k];
  m.report = std::move(rep);
  return m;
}

OneVsAllResult train_one_vs_all(const TensorD& x, const std::vector<LabelColumn>& columns,
                                const LogRegConfig& config) {
  OneVsAllResult out;
  out.model.config = config;
  for (const auto& c : columns) {
    try {
      out.model.tasks.push_back(train_logreg(x, c.y, config, c.name));
    } catch (const TrainingError& e) {
      out.errors.push_back(e.what());
    }
  }
  return out;
}

std::vector<TaskPrediction> predict(const LogRegModel& model, const TensorD& x, double threshold) {
  if (x.rank() != 2) throw ShapeError("predict expects [B,K] embeddings, got " + shape_str(x.dims()));
  std::vector<TaskPrediction> out;
  const auto xm = as_matrix(x);
  for (const auto& t : model.tasks) {
    if (t.w.size() != x.dim(1)) {
      throw ShapeError("task '" + t.name + "' expects width " + std::to_string(t.w.size()) + ", got " +
                       std::to_string(x.dim(1)));
    }
    const Vec z = xm * Eigen::Map<const Vec>(t.w.data(), static_cast<Eigen::Index>(t.w.size()));
    TaskPrediction p{t.name, std::vector<double>(x.dim(0)), std::vector<int>(x.dim(0))};
    for (std::size_t i = 0; i < x.dim(0); ++i) {
      p.probability[i] = sigmoid(z[static_cast<Eigen::Index>(i)] + t.b);
      p.label[i] = p.probability[i] >= threshold ? 1 : 0;
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace mlr::downstream
