#pragma once

// Confusion matrices, accuracy, and micro/macro precision, recall and F1.

#include <cstdio>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rweet/corpus.hpp"
#include "rweet/error.hpp"

namespace rweet {

// Rows are actual labels, columns predicted labels, both in domain order.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t labels) : n_(labels), cells_(labels * labels, 0) {}

  std::size_t labels() const { return n_; }
  std::size_t& at(std::size_t actual, std::size_t predicted) { return cells_[actual * n_ + predicted]; }
  std::size_t at(std::size_t actual, std::size_t predicted) const { return cells_[actual * n_ + predicted]; }

  std::size_t total() const {
    std::size_t t = 0;
    for (auto c : cells_) t += c;
    return t;
  }
  std::size_t trace() const {
    std::size_t t = 0;
    for (std::size_t i = 0; i < n_; ++i) t += at(i, i);
    return t;
  }

  std::size_t tp(std::size_t l) const { return at(l, l); }
  std::size_t fp(std::size_t l) const {
    std::size_t s = 0;
    for (std::size_t a = 0; a < n_; ++a)
      if (a != l) s += at(a, l);
    return s;
  }
  std::size_t fn(std::size_t l) const {
    std::size_t s = 0;
    for (std::size_t p = 0; p < n_; ++p)
      if (p != l) s += at(l, p);
    return s;
  }
  std::size_t support(std::size_t l) const { return tp(l) + fn(l); }

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t n_;
  std::vector<std::size_t> cells_;
};

inline ConfusionMatrix confusion(std::span<const int> actual, std::span<const int> predicted,
                                 std::size_t labels) {
  if (actual.size() != predicted.size())
    fail(ErrorKind::kValidation, "confusion: " + std::to_string(actual.size()) + " labels vs " +
                                     std::to_string(predicted.size()) + " predictions");
  ConfusionMatrix cm(labels);
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] < 0 || predicted[i] < 0 || static_cast<std::size_t>(actual[i]) >= labels ||
        static_cast<std::size_t>(predicted[i]) >= labels)
      fail(ErrorKind::kValidation, "confusion: label index out of range at row " + std::to_string(i));
    ++cm.at(static_cast<std::size_t>(actual[i]), static_cast<std::size_t>(predicted[i]));
  }
  return cm;
}

inline ConfusionMatrix confusion(std::span<const std::string> actual,
                                 std::span<const std::string> predicted, const LabelDomain& domain) {
  auto to_index = [&](std::span<const std::string> labels) {
    std::vector<int> out;
    for (const auto& l : labels) {
      auto i = domain.index_of(l);
      if (!i) fail(ErrorKind::kValidation, "confusion: unknown label '" + l + "'");
      out.push_back(*i);
    }
    return out;
  };
  auto a = to_index(actual), p = to_index(predicted);
  return confusion(std::span<const int>(a), std::span<const int>(p), domain.size());
}

namespace detail {
inline double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }
inline double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }
}  // namespace detail

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const Prf&) const = default;
};

// Pooled TP/FP/FN over all labels.
inline Prf micro_metrics(const ConfusionMatrix& cm) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t l = 0; l < cm.labels(); ++l) {
    tp += static_cast<double>(cm.tp(l));
    fp += static_cast<double>(cm.fp(l));
    fn += static_cast<double>(cm.fn(l));
  }
  Prf m;
  m.precision = detail::ratio(tp, tp + fp);
  m.recall = detail::ratio(tp, tp + fn);
  m.f1 = detail::harmonic(m.precision, m.recall);
  return m;
}

// Unweighted means of per-class precision and recall; F1 is the harmonic mean
// of those two means, not the mean of per-class F1.
inline Prf macro_metrics(const ConfusionMatrix& cm) {
  double p = 0, r = 0;
  auto n = static_cast<double>(cm.labels());
  for (std::size_t l = 0; l < cm.labels(); ++l) {
    auto tp = static_cast<double>(cm.tp(l));
    p += detail::ratio(tp, tp + static_cast<double>(cm.fp(l)));
    r += detail::ratio(tp, tp + static_cast<double>(cm.fn(l)));
  }
  Prf m;
  m.precision = p / n;
  m.recall = r / n;
  m.f1 = detail::harmonic(m.precision, m.recall);
  return m;
}

inline double accuracy(const ConfusionMatrix& cm) {
  return detail::ratio(static_cast<double>(cm.trace()), static_cast<double>(cm.total()));
}

struct ClassMetrics {
  std::string label;
  Prf prf;
  std::size_t support = 0;

  bool operator==(const ClassMetrics&) const = default;
};

struct MetricsReport {
  double accuracy = 0.0;
  Prf micro;
  Prf macro;
  std::vector<ClassMetrics> per_class;

  bool operator==(const MetricsReport&) const = default;
};

inline MetricsReport metrics_report(const ConfusionMatrix& cm, const std::vector<std::string>& labels) {
  MetricsReport r;
  r.accuracy = accuracy(cm);
  r.micro = micro_metrics(cm);
  r.macro = macro_metrics(cm);
  for (std::size_t l = 0; l < cm.labels(); ++l) {
    auto tp = static_cast<double>(cm.tp(l));
    Prf c;
    c.precision = detail::ratio(tp, tp + static_cast<double>(cm.fp(l)));
    c.recall = detail::ratio(tp, tp + static_cast<double>(cm.fn(l)));
    c.f1 = detail::harmonic(c.precision, c.recall);
    r.per_class.push_back({l < labels.size() ? labels[l] : std::to_string(l), c, cm.support(l)});
  }
  return r;
}

// Machine-readable record with a fixed key set.
inline nlohmann::ordered_json report_to_json(const MetricsReport& r) {
  nlohmann::ordered_json per_class = nlohmann::ordered_json::array();
  for (const auto& c : r.per_class)
    per_class.push_back({{"label", c.label},
                         {"precision", c.prf.precision},
                         {"recall", c.prf.recall},
                         {"f1", c.prf.f1},
                         {"support", c.support}});
  return {{"accuracy", r.accuracy},       {"p_micro", r.micro.precision},
          {"r_micro", r.micro.recall},    {"f1_micro", r.micro.f1},
          {"p_macro", r.macro.precision}, {"r_macro", r.macro.recall},
          {"f1_macro", r.macro.f1},       {"per_class", per_class}};
}

inline MetricsReport report_from_json(const nlohmann::json& j) {
  try {
    MetricsReport r;
    r.accuracy = j.at("accuracy").get<double>();
    r.micro = {j.at("p_micro").get<double>(), j.at("r_micro").get<double>(),
               j.at("f1_micro").get<double>()};
    r.macro = {j.at("p_macro").get<double>(), j.at("r_macro").get<double>(),
               j.at("f1_macro").get<double>()};
    for (const auto& c : j.at("per_class"))
      r.per_class.push_back({c.at("label").get<std::string>(),
                             {c.at("precision").get<double>(), c.at("recall").get<double>(),
                              c.at("f1").get<double>()},
                             c.at("support").get<std::size_t>()});
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, std::string("metrics record: ") + e.what());
  }
}

inline std::string percent(double v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

// Fixed-layout text table, percentages with two decimals.
inline std::string render_report(const MetricsReport& r) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %9s %9s %9s %9s\n", "average", "accuracy", "precision",
                "recall", "f1");
  out << line;
  std::snprintf(line, sizeof line, "%-10s %9s %9s %9s %9s\n", "micro", percent(r.accuracy).c_str(),
                percent(r.micro.precision).c_str(), percent(r.micro.recall).c_str(),
                percent(r.micro.f1).c_str());
  out << line;
  std::snprintf(line, sizeof line, "%-10s %9s %9s %9s %9s\n", "macro", percent(r.accuracy).c_str(),
                percent(r.macro.precision).c_str(), percent(r.macro.recall).c_str(),
                percent(r.macro.f1).c_str());
  out << line;
  out << "\n";
  std::snprintf(line, sizeof line, "%-10s %9s %9s %9s %9s\n", "class", "precision", "recall", "f1",
                "support");
  out << line;
  for (const auto& c : r.per_class) {
    std::snprintf(line, sizeof line, "%-10s %9s %9s %9s %9zu\n", c.label.c_str(),
                  percent(c.prf.precision).c_str(), percent(c.prf.recall).c_str(),
                  percent(c.prf.f1).c_str(), c.support);
    out << line;
  }
  return out.str();
}

}  // namespace rweet
