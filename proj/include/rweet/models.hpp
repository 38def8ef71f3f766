#pragma once

// Classifiers over sparse rows (softmax logistic regression, multinomial
// naive Bayes), stratified k-fold plans and cross-validation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rweet/digest.hpp"
#include "rweet/error.hpp"
#include "rweet/eval.hpp"
#include "rweet/features.hpp"
#include "rweet/io.hpp"
#include "rweet/sparse.hpp"

namespace rweet {

struct TrainConfig {
  double learning_rate = 1.0;
  double l2 = 1e-4;
  int max_epochs = 500;
  double tolerance = 1e-6;  // stop once |loss(t) - loss(t-1)| falls below
  std::uint64_t seed = 1;

  void validate() const {
    if (!(learning_rate > 0.0)) fail(ErrorKind::kUsage, "learning rate must be > 0");
    if (!(l2 >= 0.0)) fail(ErrorKind::kUsage, "L2 penalty must be >= 0");
    if (max_epochs < 1) fail(ErrorKind::kUsage, "max epochs must be >= 1");
    if (!(tolerance >= 0.0)) fail(ErrorKind::kUsage, "tolerance must be >= 0");
  }

  std::string digest() const {
    return Digest()
        .add("train-v1")
        .add_real(learning_rate)
        .add_real(l2)
        .add_int(max_epochs)
        .add_real(tolerance)
        .add_int(static_cast<std::int64_t>(seed))
        .hex();
  }

  bool operator==(const TrainConfig&) const = default;
};

namespace detail {

// Uniform double in [0,1) from the top 53 bits; identical on every platform.
inline double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline void check_labels(const SparseMatrix& x, std::span<const int> y, std::size_t classes) {
  if (y.size() != x.rows())
    fail(ErrorKind::kValidation, "got " + std::to_string(y.size()) + " labels for " +
                                     std::to_string(x.rows()) + " rows");
  for (int label : y)
    if (label < 0 || static_cast<std::size_t>(label) >= classes)
      fail(ErrorKind::kValidation, "label index " + std::to_string(label) + " outside the class list");
}

inline std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] > v[best]) best = k;  // strict: ties keep the lowest index
  return best;
}

inline void softmax_in_place(std::span<double> z) {
  double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (auto& v : z) sum += (v = std::exp(v - mx));
  for (auto& v : z) v /= sum;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Logistic regression

// Multinomial objective: mean cross-entropy + (l2/2)||W||^2 (bias unpenalized).
// Parameters are flattened as [W (classes x cols, row-major) | b (classes)].
class SoftmaxObjective {
 public:
  SoftmaxObjective(const SparseMatrix& x, std::span<const int> y, std::size_t classes, double l2)
      : x_(x), y_(y), k_(classes), l2_(l2) {}

  std::size_t param_count() const { return k_ * x_.cols() + k_; }

  double loss(std::span<const double> params) const {
    double total = 0.0;
    std::vector<double> z(k_);
    for (std::size_t r = 0; r < x_.rows(); ++r) {
      scores(params, r, z);
      double mx = *std::max_element(z.begin(), z.end());
      double lse = 0.0;
      for (double v : z) lse += std::exp(v - mx);
      total += mx + std::log(lse) - z[static_cast<std::size_t>(y_[r])];
    }
    double reg = 0.0;
    for (std::size_t i = 0; i < k_ * x_.cols(); ++i) reg += params[i] * params[i];
    return total / static_cast<double>(x_.rows()) + 0.5 * l2_ * reg;
  }

  void gradient(std::span<const double> params, std::span<double> grad) const {
    std::fill(grad.begin(), grad.end(), 0.0);
    const std::size_t cols = x_.cols();
    const double inv_n = 1.0 / static_cast<double>(x_.rows());
    std::vector<double> p(k_);
    for (std::size_t r = 0; r < x_.rows(); ++r) {
      scores(params, r, p);
      detail::softmax_in_place(p);
      p[static_cast<std::size_t>(y_[r])] -= 1.0;
      auto row = x_.row(r);
      for (std::size_t k = 0; k < k_; ++k) {
        double coeff = p[k] * inv_n;
        for (std::size_t j = 0; j < row.nnz(); ++j) grad[k * cols + row.cols[j]] += coeff * row.values[j];
        grad[k_ * cols + k] += coeff;
      }
    }
    for (std::size_t i = 0; i < k_ * cols; ++i) grad[i] += l2_ * params[i];
  }

 private:
  void scores(std::span<const double> params, std::size_t r, std::span<double> z) const {
    const std::size_t cols = x_.cols();
    auto row = x_.row(r);
    for (std::size_t k = 0; k < k_; ++k) {
      double s = params[k_ * cols + k];
      for (std::size_t j = 0; j < row.nnz(); ++j) s += params[k * cols + row.cols[j]] * row.values[j];
      z[k] = s;
    }
  }

  const SparseMatrix& x_;
  std::span<const int> y_;
  std::size_t k_;
  double l2_;
};

struct LogRegModel {
  std::vector<std::string> classes;
  std::size_t cols = 0;
  std::vector<double> weights;  // classes x cols, row-major
  std::vector<double> bias;
  TrainConfig config;
  int epochs = 0;

  std::vector<double> params() const {
    auto p = weights;
    p.insert(p.end(), bias.begin(), bias.end());
    return p;
  }

  double weight_norm() const {
    double s = 0.0;
    for (double w : weights) s += w * w;
    return std::sqrt(s);
  }

  bool operator==(const LogRegModel&) const = default;
};

struct Prediction {
  std::vector<int> labels;
  std::vector<std::vector<double>> probabilities;  // one row per input row
};

// Full-batch gradient descent from zero weights. `loss_trace`, when given,
// receives the loss before the first step and after every step.
inline LogRegModel train_logreg(const SparseMatrix& x, std::span<const int> y,
                                const std::vector<std::string>& classes, const TrainConfig& cfg = {},
                                std::vector<double>* loss_trace = nullptr) {
  cfg.validate();
  detail::check_labels(x, y, classes.size());
  if (x.rows() == 0) fail(ErrorKind::kValidation, "cannot train on an empty matrix");
  if (std::all_of(y.begin(), y.end(), [&](int v) { return v == y[0]; }))
    fail(ErrorKind::kValidation, "training labels contain a single class ('" +
                                     classes[static_cast<std::size_t>(y[0])] + "')");
  SoftmaxObjective objective(x, y, classes.size(), cfg.l2);
  std::vector<double> params(objective.param_count(), 0.0), grad(params.size());
  double loss = objective.loss(params);
  if (loss_trace) loss_trace->assign(1, loss);
  int epoch = 0;
  while (epoch < cfg.max_epochs) {
    ++epoch;
    objective.gradient(params, grad);
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= cfg.learning_rate * grad[i];
    double next = objective.loss(params);
    if (!std::isfinite(next))
      fail(ErrorKind::kNumeric, "logistic regression diverged at epoch " + std::to_string(epoch));
    if (loss_trace) loss_trace->push_back(next);
    bool converged = std::abs(loss - next) < cfg.tolerance;
    loss = next;
    if (converged) break;
  }
  LogRegModel m;
  m.classes = classes;
  m.cols = x.cols();
  auto split = params.begin() + static_cast<std::ptrdiff_t>(classes.size() * x.cols());
  m.weights.assign(params.begin(), split);
  m.bias.assign(split, params.end());
  m.config = cfg;
  m.epochs = epoch;
  return m;
}

inline Prediction predict_logreg(const LogRegModel& m, const SparseMatrix& x) {
  if (x.cols() != m.cols)
    fail(ErrorKind::kValidation, "model expects " + std::to_string(m.cols) + " columns, matrix has " +
                                     std::to_string(x.cols()));
  const std::size_t k = m.classes.size();
  Prediction out;
  out.labels.reserve(x.rows());
  out.probabilities.reserve(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    std::vector<double> z(m.bias);
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t j = 0; j < row.nnz(); ++j) z[c] += m.weights[c * m.cols + row.cols[j]] * row.values[j];
    // argmax on raw scores keeps exact ties exact
    out.labels.push_back(static_cast<int>(detail::argmax(z)));
    detail::softmax_in_place(z);
    out.probabilities.push_back(std::move(z));
  }
  return out;
}

// Largest relative error between the analytic gradient and central finite
// differences, at a seeded random parameter point in [-1, 1).
inline double gradient_check(const SparseMatrix& x, std::span<const int> y, std::size_t classes,
                             const TrainConfig& cfg, double h = 1e-5) {
  detail::check_labels(x, y, classes);
  SoftmaxObjective objective(x, y, classes, cfg.l2);
  std::mt19937_64 rng(cfg.seed);
  std::vector<double> params(objective.param_count());
  for (auto& p : params) p = 2.0 * detail::unit_draw(rng) - 1.0;
  std::vector<double> grad(params.size());
  objective.gradient(params, grad);
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    double saved = params[i];
    params[i] = saved + h;
    double up = objective.loss(params);
    params[i] = saved - h;
    double down = objective.loss(params);
    params[i] = saved;
    double numeric = (up - down) / (2.0 * h);
    double denom = std::max(std::abs(grad[i]) + std::abs(numeric), 1e-8);
    worst = std::max(worst, std::abs(grad[i] - numeric) / denom);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Multinomial naive Bayes

struct NaiveBayesModel {
  std::vector<std::string> classes;
  std::size_t cols = 0;
  double alpha = 1.0;
  std::vector<double> log_prior;       // per class
  std::vector<double> log_likelihood;  // classes x cols, row-major

  bool operator==(const NaiveBayesModel&) const = default;
};

// likelihood(t|c) = (count(t,c) + alpha) / (sum_t count(t,c) + alpha |V|)
inline NaiveBayesModel train_nb(const SparseMatrix& counts, std::span<const int> y,
                                const std::vector<std::string>& classes, double alpha = 1.0) {
  if (!(alpha > 0.0)) fail(ErrorKind::kUsage, "naive Bayes smoothing alpha must be > 0");
  detail::check_labels(counts, y, classes.size());
  if (counts.rows() == 0) fail(ErrorKind::kValidation, "cannot train on an empty matrix");
  const std::size_t k = classes.size(), cols = counts.cols();
  std::vector<double> term(k * cols, 0.0), class_total(k, 0.0), docs(k, 0.0);
  for (std::size_t r = 0; r < counts.rows(); ++r) {
    auto c = static_cast<std::size_t>(y[r]);
    docs[c] += 1.0;
    auto row = counts.row(r);
    for (std::size_t j = 0; j < row.nnz(); ++j) {
      if (row.values[j] < 0.0)
        fail(ErrorKind::kValidation, "naive Bayes needs nonnegative counts (row " + std::to_string(r) + ")");
      term[c * cols + row.cols[j]] += row.values[j];
      class_total[c] += row.values[j];
    }
  }
  NaiveBayesModel m{classes, cols, alpha, std::vector<double>(k), std::vector<double>(k * cols)};
  for (std::size_t c = 0; c < k; ++c) {
    m.log_prior[c] = std::log(docs[c] / static_cast<double>(counts.rows()));
    double denom = std::log(class_total[c] + alpha * static_cast<double>(cols));
    for (std::size_t t = 0; t < cols; ++t)
      m.log_likelihood[c * cols + t] = std::log(term[c * cols + t] + alpha) - denom;
  }
  return m;
}

// log prior + sum_t x(t) log likelihood(t|c), per class.
inline std::vector<double> nb_joint_log(const NaiveBayesModel& m, const SparseRowView& row) {
  std::vector<double> z(m.log_prior);
  for (std::size_t c = 0; c < z.size(); ++c)
    for (std::size_t j = 0; j < row.nnz(); ++j)
      z[c] += row.values[j] * m.log_likelihood[c * m.cols + row.cols[j]];
  return z;
}

inline Prediction predict_nb(const NaiveBayesModel& m, const SparseMatrix& x) {
  if (x.cols() != m.cols)
    fail(ErrorKind::kValidation, "model expects " + std::to_string(m.cols) + " columns, matrix has " +
                                     std::to_string(x.cols()));
  Prediction out;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto z = nb_joint_log(m, x.row(r));
    out.labels.push_back(static_cast<int>(detail::argmax(z)));
    detail::softmax_in_place(z);
    out.probabilities.push_back(std::move(z));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model files: header "MODEL v1 <kind> <classes> <cols>", then one keyword
// line per parameter block, values in %.17g.

namespace detail {

inline void write_values(std::ostream& out, std::string_view key, std::span<const double> v) {
  out << key;
  for (double x : v) out << ' ' << format_double(x);
  out << '\n';
}

inline std::vector<double> read_values(std::istream& in, std::string_view key, std::size_t n,
                                       const std::string& where) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::kFormat, where + ": missing '" + std::string(key) + "'");
  std::istringstream ls(line);
  std::string k;
  ls >> k;
  if (k != key) fail(ErrorKind::kFormat, where + ": expected '" + std::string(key) + "', got '" + k + "'");
  std::vector<double> v;
  for (std::string tok; ls >> tok;) {
    try {
      v.push_back(std::stod(tok));
    } catch (const std::exception&) {
      if (tok == "-inf") v.push_back(-INFINITY);
      else fail(ErrorKind::kFormat, where + ": bad number '" + tok + "'");
    }
  }
  if (v.size() != n)
    fail(ErrorKind::kFormat, where + ": '" + std::string(key) + "' has " + std::to_string(v.size()) +
                                 " values, expected " + std::to_string(n));
  return v;
}

inline void write_classes(std::ostream& out, const std::vector<std::string>& classes) {
  out << "classes";
  for (const auto& c : classes) {
    if (c.empty() || c.find_first_of(" \t\n") != std::string::npos)
      fail(ErrorKind::kValidation, "class label '" + c + "' cannot be stored (whitespace)");
    out << ' ' << c;
  }
  out << '\n';
}

inline std::vector<std::string> read_classes(std::istream& in, std::size_t n, const std::string& where) {
  std::string line;
  std::getline(in, line);
  std::istringstream ls(line);
  std::string key;
  ls >> key;
  std::vector<std::string> classes;
  for (std::string c; ls >> c;) classes.push_back(c);
  if (key != "classes" || classes.size() != n) fail(ErrorKind::kFormat, where + ": bad classes line");
  return classes;
}

}  // namespace detail

inline std::string serialize_model(const LogRegModel& m) {
  std::ostringstream out;
  out << "MODEL v1 logreg " << m.classes.size() << ' ' << m.cols << '\n';
  detail::write_classes(out, m.classes);
  out << "config " << format_double(m.config.learning_rate) << ' ' << format_double(m.config.l2) << ' '
      << m.config.max_epochs << ' ' << format_double(m.config.tolerance) << ' ' << m.config.seed << ' '
      << m.epochs << '\n';
  detail::write_values(out, "bias", m.bias);
  for (std::size_t c = 0; c < m.classes.size(); ++c)
    detail::write_values(out, "weights", std::span<const double>(m.weights).subspan(c * m.cols, m.cols));
  return out.str();
}

inline std::string serialize_model(const NaiveBayesModel& m) {
  std::ostringstream out;
  out << "MODEL v1 naive_bayes " << m.classes.size() << ' ' << m.cols << '\n';
  detail::write_classes(out, m.classes);
  out << "alpha " << format_double(m.alpha) << '\n';
  detail::write_values(out, "log_prior", m.log_prior);
  for (std::size_t c = 0; c < m.classes.size(); ++c)
    detail::write_values(out, "log_likelihood",
                         std::span<const double>(m.log_likelihood).subspan(c * m.cols, m.cols));
  return out.str();
}

struct ModelHeader {
  std::string kind;
  std::size_t classes = 0;
  std::size_t cols = 0;
};

inline ModelHeader read_model_header(std::istream& in, const std::string& where) {
  std::string line, magic, version;
  std::getline(in, line);
  std::istringstream hs(line);
  ModelHeader h;
  if (!(hs >> magic >> version >> h.kind >> h.classes >> h.cols) || magic != "MODEL" || version != "v1")
    fail(ErrorKind::kFormat, where + ": bad MODEL header");
  return h;
}

inline LogRegModel parse_logreg(std::istream& in, const ModelHeader& h, const std::string& where) {
  LogRegModel m;
  m.cols = h.cols;
  m.classes = detail::read_classes(in, h.classes, where);
  std::string line, key;
  std::getline(in, line);
  std::istringstream cs(line);
  if (!(cs >> key >> m.config.learning_rate >> m.config.l2 >> m.config.max_epochs >>
        m.config.tolerance >> m.config.seed >> m.epochs) ||
      key != "config")
    fail(ErrorKind::kFormat, where + ": bad config line");
  m.bias = detail::read_values(in, "bias", h.classes, where);
  for (std::size_t c = 0; c < h.classes; ++c) {
    auto w = detail::read_values(in, "weights", h.cols, where);
    m.weights.insert(m.weights.end(), w.begin(), w.end());
  }
  return m;
}

inline NaiveBayesModel parse_nb(std::istream& in, const ModelHeader& h, const std::string& where) {
  NaiveBayesModel m;
  m.cols = h.cols;
  m.classes = detail::read_classes(in, h.classes, where);
  m.alpha = detail::read_values(in, "alpha", 1, where)[0];
  m.log_prior = detail::read_values(in, "log_prior", h.classes, where);
  for (std::size_t c = 0; c < h.classes; ++c) {
    auto v = detail::read_values(in, "log_likelihood", h.cols, where);
    m.log_likelihood.insert(m.log_likelihood.end(), v.begin(), v.end());
  }
  return m;
}

// ---------------------------------------------------------------------------
// Pluggable classifier interface

enum class ClassifierKind { kLogisticRegression, kNaiveBayes };

inline ClassifierKind parse_classifier(std::string_view s) {
  if (s == "lr" || s == "logreg") return ClassifierKind::kLogisticRegression;
  if (s == "nb" || s == "naive_bayes") return ClassifierKind::kNaiveBayes;
  fail(ErrorKind::kUsage, "unknown classifier '" + std::string(s) + "' (expected lr or nb)");
}

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::string name() const = 0;
  // Naive Bayes consumes raw counts; everything else the weighted rows.
  virtual bool wants_counts() const = 0;
  virtual void fit(const SparseMatrix& x, std::span<const int> y, const std::vector<std::string>& classes) = 0;
  virtual Prediction predict(const SparseMatrix& x) const = 0;
  virtual std::string serialize() const = 0;
};

class LogisticRegression final : public Classifier {
 public:
  explicit LogisticRegression(TrainConfig cfg = {}) : cfg_(cfg) {}
  explicit LogisticRegression(LogRegModel model) : cfg_(model.config), model_(std::move(model)) {}

  std::string name() const override { return "logreg"; }
  bool wants_counts() const override { return false; }
  void fit(const SparseMatrix& x, std::span<const int> y, const std::vector<std::string>& classes) override {
    model_ = train_logreg(x, y, classes, cfg_);
  }
  Prediction predict(const SparseMatrix& x) const override { return predict_logreg(model_, x); }
  std::string serialize() const override { return serialize_model(model_); }
  const LogRegModel& model() const { return model_; }

 private:
  TrainConfig cfg_;
  LogRegModel model_;
};

class NaiveBayes final : public Classifier {
 public:
  explicit NaiveBayes(double alpha = 1.0) : alpha_(alpha) {}
  explicit NaiveBayes(NaiveBayesModel model) : alpha_(model.alpha), model_(std::move(model)) {}

  std::string name() const override { return "naive_bayes"; }
  bool wants_counts() const override { return true; }
  void fit(const SparseMatrix& x, std::span<const int> y, const std::vector<std::string>& classes) override {
    model_ = train_nb(x, y, classes, alpha_);
  }
  Prediction predict(const SparseMatrix& x) const override { return predict_nb(model_, x); }
  std::string serialize() const override { return serialize_model(model_); }
  const NaiveBayesModel& model() const { return model_; }

 private:
  double alpha_;
  NaiveBayesModel model_;
};

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::kLogisticRegression;
  TrainConfig train;
  double nb_alpha = 1.0;

  std::unique_ptr<Classifier> make() const {
    if (kind == ClassifierKind::kNaiveBayes) return std::make_unique<NaiveBayes>(nb_alpha);
    return std::make_unique<LogisticRegression>(train);
  }
};

inline void save_model(const std::filesystem::path& path, const Classifier& c) {
  write_file_atomic(path, c.serialize());
}

inline std::unique_ptr<Classifier> load_model(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  auto where = path.string();
  auto h = read_model_header(in, where);
  if (h.kind == "logreg") return std::make_unique<LogisticRegression>(parse_logreg(in, h, where));
  if (h.kind == "naive_bayes") return std::make_unique<NaiveBayes>(parse_nb(in, h, where));
  fail(ErrorKind::kFormat, where + ": unknown model kind '" + h.kind + "'");
}

// ---------------------------------------------------------------------------
// Stratified k-fold

struct FoldPlan {
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<int> fold_of;  // tweet index -> fold id

  std::vector<std::size_t> test_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
      if (fold_of[i] == fold) out.push_back(i);
    return out;
  }
  std::vector<std::size_t> train_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
      if (fold_of[i] != fold) out.push_back(i);
    return out;
  }

  bool operator==(const FoldPlan&) const = default;
};

// Within each class (in ascending class order) indices are shuffled with the
// seeded RNG and dealt round-robin; the dealing position carries over between
// classes so fold sizes stay balanced.
inline FoldPlan stratified_kfold(std::span<const int> y, int k, std::uint64_t seed,
                                 const std::vector<std::string>& class_names = {}) {
  if (k < 2) fail(ErrorKind::kUsage, "fold count must be >= 2, got " + std::to_string(k));
  int max_class = y.empty() ? -1 : *std::max_element(y.begin(), y.end());
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(max_class + 1));
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0) fail(ErrorKind::kValidation, "negative class index at row " + std::to_string(i));
    members[static_cast<std::size_t>(y[i])].push_back(i);
  }
  FoldPlan plan{k, seed, std::vector<int>(y.size(), -1)};
  std::mt19937_64 rng(seed);
  std::size_t deal = 0;
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto& idx = members[c];
    if (idx.empty()) continue;
    if (idx.size() < static_cast<std::size_t>(k)) {
      auto name = c < class_names.size() ? class_names[c] : std::to_string(c);
      fail(ErrorKind::kValidation, "class '" + name + "' has " + std::to_string(idx.size()) +
                                       " members, fewer than " + std::to_string(k) + " folds");
    }
    for (std::size_t i = idx.size() - 1; i > 0; --i) std::swap(idx[i], idx[rng() % (i + 1)]);
    for (auto i : idx) plan.fold_of[i] = static_cast<int>(deal++ % static_cast<std::size_t>(k));
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Cross-validation

// Cleaned documents with their raw texts (for rules) and gold labels.
struct LabeledCorpus {
  std::vector<std::string> ids;
  std::vector<TokenList> docs;
  std::vector<std::string> raw_texts;
  std::vector<int> y;
  std::vector<std::string> classes;

  std::size_t size() const { return docs.size(); }
};

inline LabeledCorpus make_labeled(const CleanCorpus& clean, const Dataset& source) {
  LabeledCorpus lc;
  lc.classes = source.domain.labels();
  lc.ids = row_ids(clean);
  lc.docs = token_lists(clean);
  lc.raw_texts = raw_texts(clean, source);
  for (const auto& t : clean.tweets) {
    if (!t.label) fail(ErrorKind::kValidation, "tweet '" + t.id + "' has no label; training needs labeled data");
    auto idx = source.domain.index_of(*t.label);
    if (!idx) fail(ErrorKind::kValidation, "unknown label '" + *t.label + "'");
    lc.y.push_back(*idx);
  }
  return lc;
}

template <typename T>
std::vector<T> gather(const std::vector<T>& v, std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

struct CvResult {
  FoldPlan plan;
  std::vector<int> predictions;  // per corpus row, from the fold holding it out
  std::vector<int> times_predicted;
  MetricsReport pooled;
  std::vector<MetricsReport> folds;
};

// Per fold, the vocabulary and the model are fit on the training split only;
// held-out predictions are pooled into one report.
inline CvResult cross_validate(const ClassifierSpec& spec, const LabeledCorpus& data,
                               const FeatureConfig& config, int k, std::uint64_t seed) {
  auto plan = stratified_kfold(data.y, k, seed, data.classes);
  auto rules = config.append_rules ? rule_features(data.raw_texts) : RuleMatrix(data.size());
  CvResult result{plan, std::vector<int>(data.size(), -1), std::vector<int>(data.size(), 0), {}, {}};
  for (int fold = 0; fold < k; ++fold) {
    auto train = plan.train_indices(fold), test = plan.test_indices(fold);
    auto train_docs = gather(data.docs, train), test_docs = gather(data.docs, test);
    auto train_rules = gather(rules, train), test_rules = gather(rules, test);
    auto train_y = gather(data.y, train), test_y = gather(data.y, test);
    auto featurizer = Featurizer::fit(train_docs, config);
    auto model = spec.make();
    auto rows = [&](const std::vector<TokenList>& docs, const RuleMatrix& r) {
      return model->wants_counts() ? featurizer.counts(docs, r) : featurizer.transform(docs, r);
    };
    model->fit(rows(train_docs, train_rules), train_y, data.classes);
    auto predicted = model->predict(rows(test_docs, test_rules)).labels;
    for (std::size_t i = 0; i < test.size(); ++i) {
      result.predictions[test[i]] = predicted[i];
      ++result.times_predicted[test[i]];
    }
    result.folds.push_back(metrics_report(confusion(test_y, predicted, data.classes.size()), data.classes));
  }
  result.pooled =
      metrics_report(confusion(data.y, result.predictions, data.classes.size()), data.classes);
  return result;
}

// Fit and predict on the same rows (the literal train-then-predict loop).
inline MetricsReport resubstitution(const ClassifierSpec& spec, const LabeledCorpus& data,
                                    const FeatureConfig& config) {
  auto rules = config.append_rules ? rule_features(data.raw_texts) : RuleMatrix(data.size());
  auto featurizer = Featurizer::fit(data.docs, config);
  auto model = spec.make();
  auto x = model->wants_counts() ? featurizer.counts(data.docs, rules) : featurizer.transform(data.docs, rules);
  model->fit(x, data.y, data.classes);
  auto predicted = model->predict(x).labels;
  return metrics_report(confusion(data.y, predicted, data.classes.size()), data.classes);
}

}  // namespace rweet
