#pragma once

// Two-stage series: identify rweets, drop the rest, categorize what remains.
// Feature matrices for each stage go through a digest-keyed on-disk cache.

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rweet/corpus.hpp"
#include "rweet/digest.hpp"
#include "rweet/error.hpp"
#include "rweet/features.hpp"
#include "rweet/io.hpp"
#include "rweet/models.hpp"
#include "rweet/preprocess.hpp"

namespace rweet {

struct FilterResult {
  FeatureMatrix kept;
  std::vector<std::size_t> removed;  // ascending row indices
};

// Deletes the rows whose stage-1 label is not_rweet; row ids stay aligned.
inline FilterResult filter_rweets(const FeatureMatrix& x, std::span<const std::string> stage1) {
  if (stage1.size() != x.rows())
    fail(ErrorKind::kValidation, "filter: " + std::to_string(stage1.size()) + " labels for " +
                                     std::to_string(x.rows()) + " rows");
  std::vector<std::size_t> keep;
  FilterResult out;
  for (std::size_t r = 0; r < stage1.size(); ++r)
    (stage1[r] == kRweet ? keep : out.removed).push_back(r);
  out.kept = x;
  out.kept.matrix = x.matrix.select_rows(keep);
  out.kept.row_ids.clear();
  for (auto r : keep) out.kept.row_ids.push_back(x.row_ids[r]);
  return out;
}

// ---------------------------------------------------------------------------
// Feature cache

// Matrices live under <dir>/<name>.{spmat,vocab,rows,meta}. Without a
// directory everything is recomputed in memory.
class FeatureCache {
 public:
  FeatureCache() = default;
  explicit FeatureCache(std::filesystem::path dir, bool allow_recompute = true)
      : dir_(std::move(dir)), allow_recompute_(allow_recompute) {}

  const std::optional<std::filesystem::path>& dir() const { return dir_; }
  std::size_t hits() const { return hits_; }
  std::size_t computations() const { return computations_; }

  // Returns the cached matrix when its digest equals `digest`, else computes,
  // stores and returns it. With recompute disabled a miss is a stale-cache error.
  FeatureMatrix get(const std::string& name, const std::string& digest,
                    const std::function<FeatureMatrix()>& compute) {
    if (dir_) {
      auto base = *dir_ / name;
      bool present = std::filesystem::exists(with_suffix(base, ".spmat"));
      if (present && peek_matrix_digest(base) == digest) {
        ++hits_;
        return load_matrix(base, digest);
      }
      if (!allow_recompute_)
        fail(ErrorKind::kStaleCache, base.string() + (present ? ": cached digest is stale" : ": not cached") +
                                         " and recomputation is disabled");
    }
    auto m = compute();
    if (m.digest() != digest)
      fail(ErrorKind::kValidation, "computed matrix digest " + m.digest() + " differs from its key " + digest);
    ++computations_;
    if (dir_) save_matrix(*dir_ / name, m);
    return m;
  }

 private:
  std::optional<std::filesystem::path> dir_;
  bool allow_recompute_ = true;
  std::size_t hits_ = 0;
  std::size_t computations_ = 0;
};

// ---------------------------------------------------------------------------
// Staged classifier

struct Stage {
  Featurizer featurizer;
  std::shared_ptr<const Classifier> model;
  LabelDomain domain;
};

struct StagedClassifier {
  PipelineConfig preprocess;
  FeatureConfig features;
  Stage identifier{{}, nullptr, LabelDomain::binary()};
  Stage categorizer{{}, nullptr, LabelDomain::categorical()};

  std::string digest() const {
    Digest d;
    d.add("staged-v1").add(preprocess.digest()).add(features.digest());
    for (const auto* s : {&identifier, &categorizer})
      d.add(s->featurizer.digest()).add(s->model ? s->model->serialize() : std::string());
    return d.hex();
  }
};

namespace detail {

inline Stage train_stage(const Dataset& d, const LabelDomain& expected, const PipelineConfig& pcfg,
                         const FeatureConfig& fcfg, const ClassifierSpec& spec) {
  if (!(d.domain == expected))
    fail(ErrorKind::kValidation, "stage expects the '" + expected.name() + "' label domain, dataset has '" +
                                     d.domain.name() + "'");
  auto clean = run_pipeline(d, pcfg).corpus;
  auto data = make_labeled(clean, d);
  auto featurizer = Featurizer::fit(data.docs, fcfg);
  auto rules = fcfg.append_rules ? rule_features(data.raw_texts) : RuleMatrix(data.size());
  auto model = spec.make();
  auto x = model->wants_counts() ? featurizer.counts(data.docs, rules) : featurizer.transform(data.docs, rules);
  model->fit(x, data.y, data.classes);
  return {std::move(featurizer), std::shared_ptr<const Classifier>(std::move(model)), expected};
}

}  // namespace detail

// Identifier trained on the binary dataset, categorizer on the categorical one,
// both under the same preprocessing and feature configuration.
inline StagedClassifier train_staged(const Dataset& d1, const Dataset& d2, const PipelineConfig& pcfg,
                                     const FeatureConfig& fcfg, const ClassifierSpec& spec = {}) {
  StagedClassifier s;
  s.preprocess = pcfg;
  s.features = fcfg;
  s.identifier = detail::train_stage(d1, LabelDomain::binary(), pcfg, fcfg, spec);
  s.categorizer = detail::train_stage(d2, LabelDomain::categorical(), pcfg, fcfg, spec);
  return s;
}

// ---------------------------------------------------------------------------
// Staged persistence: <dir>/staged.json plus identifier.* and categorizer.*
// (featurizer .vocab/.meta and a .model file each).

inline nlohmann::json pipeline_config_to_json(const PipelineConfig& c) {
  std::vector<std::string> ops;
  for (auto op : c.ops) ops.emplace_back(op_name(op));
  return {{"ops", ops},
          {"stopword_list", c.stopword_list_id},
          {"english_threshold", c.english_threshold},
          {"min_tokens", c.min_tokens}};
}

inline PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  c.ops.clear();
  for (const auto& op : j.at("ops")) c.ops.push_back(parse_op(op.get<std::string>()));
  c.stopword_list_id = j.at("stopword_list").get<std::string>();
  c.english_threshold = j.at("english_threshold").get<double>();
  c.min_tokens = j.at("min_tokens").get<std::size_t>();
  return c;
}

inline void save_staged(const std::filesystem::path& dir, const StagedClassifier& s) {
  for (auto [name, stage] : {std::pair{"identifier", &s.identifier}, std::pair{"categorizer", &s.categorizer}}) {
    if (!stage->model) fail(ErrorKind::kValidation, std::string(name) + " model is not trained");
    save_featurizer(dir / name, stage->featurizer);
    save_model(with_suffix(dir / name, ".model"), *stage->model);
  }
  nlohmann::ordered_json manifest{{"format", "staged v1"},
                                  {"preprocess", pipeline_config_to_json(s.preprocess)},
                                  {"preprocess_digest", s.preprocess.digest()},
                                  {"features", config_to_json(s.features)},
                                  {"features_digest", s.features.digest()},
                                  {"identifier_digest", s.identifier.featurizer.digest()},
                                  {"categorizer_digest", s.categorizer.featurizer.digest()},
                                  {"digest", s.digest()}};
  write_file_atomic(dir / "staged.json", manifest.dump(1) + "\n");
}

inline StagedClassifier load_staged(const std::filesystem::path& dir) {
  auto where = (dir / "staged.json").string();
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(read_file(dir / "staged.json"));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, where + ": " + e.what());
  }
  StagedClassifier s;
  try {
    if (m.at("format") != "staged v1") fail(ErrorKind::kFormat, where + ": unknown format");
    s.preprocess = pipeline_config_from_json(m.at("preprocess"));
    s.features = config_from_json(m.at("features"));
    auto check = [&](const char* key, const std::string& actual) {
      if (m.at(key).get<std::string>() != actual)
        fail(ErrorKind::kValidation, where + ": " + key + " does not match the stored artifacts");
    };
    check("preprocess_digest", s.preprocess.digest());
    check("features_digest", s.features.digest());
    for (auto [name, stage] : {std::pair{"identifier", &s.identifier}, std::pair{"categorizer", &s.categorizer}}) {
      stage->featurizer = load_featurizer(dir / name);
      if (stage->featurizer.config().digest() != s.features.digest())
        fail(ErrorKind::kValidation, std::string(name) + " featurizer was trained under a different feature config");
      stage->model = std::shared_ptr<const Classifier>(load_model(with_suffix(dir / name, ".model")));
      check((std::string(name) + "_digest").c_str(), stage->featurizer.digest());
    }
    check("digest", s.digest());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, where + ": " + e.what());
  }
  return s;
}

// ---------------------------------------------------------------------------
// Running the series

struct CategorizedTweet {
  std::string id;
  std::string text;  // original text
  std::string stage1;
  std::optional<std::string> stage2;

  bool operator==(const CategorizedTweet&) const = default;
};

struct SeriesResult {
  std::vector<CategorizedTweet> tweets;
  std::size_t input_count = 0;  // before preprocessing
  std::size_t rweet_count = 0;
  std::vector<std::size_t> removed;  // clean-corpus rows filtered before stage 2
};

namespace detail {

inline FeatureMatrix stage_features(FeatureCache& cache, const std::string& name, const Stage& stage,
                                    const CleanCorpus& clean, const std::vector<TokenList>& docs,
                                    const RuleMatrix& rules) {
  bool counts = stage.model->wants_counts();
  FeatureMatrix shell;
  shell.config = stage.featurizer.config();
  shell.source_digest =
      Digest().add(clean.digest).add(stage.featurizer.digest()).add_flag(counts).hex();
  return cache.get(name, shell.digest(), [&] {
    FeatureMatrix m = shell;
    m.matrix = counts ? stage.featurizer.counts(docs, rules) : stage.featurizer.transform(docs, rules);
    m.vocab = stage.featurizer.vocab();
    m.row_ids = row_ids(clean);
    return m;
  });
}

}  // namespace detail

// Cache entries are named <prefix>.stage1 / <prefix>.stage2.
inline SeriesResult run_series(const Dataset& d, const StagedClassifier& s, FeatureCache& cache,
                               const std::string& prefix = "series") {
  if (!s.identifier.model || !s.categorizer.model)
    fail(ErrorKind::kValidation, "staged classifier is not trained");
  auto clean = run_pipeline(d, s.preprocess).corpus;
  auto texts = raw_texts(clean, d);
  auto docs = token_lists(clean);
  auto rules = s.features.append_rules ? rule_features(texts) : RuleMatrix(clean.size());

  auto x1 = detail::stage_features(cache, prefix + ".stage1", s.identifier, clean, docs, rules);
  auto y1 = s.identifier.model->predict(x1.matrix).labels;
  std::vector<std::string> stage1;
  for (int y : y1) stage1.push_back(s.identifier.domain.labels()[static_cast<std::size_t>(y)]);

  auto x2 = detail::stage_features(cache, prefix + ".stage2", s.categorizer, clean, docs, rules);
  auto filtered = filter_rweets(x2, stage1);
  auto y2 = s.categorizer.model->predict(filtered.kept.matrix).labels;

  SeriesResult out;
  out.input_count = d.size();
  out.removed = filtered.removed;
  std::size_t next = 0;
  for (std::size_t r = 0; r < clean.size(); ++r) {
    CategorizedTweet t{clean.tweets[r].id, texts[r], stage1[r], std::nullopt};
    if (stage1[r] == kRweet) {
      t.stage2 = s.categorizer.domain.labels()[static_cast<std::size_t>(y2[next++])];
      ++out.rweet_count;
    }
    out.tweets.push_back(std::move(t));
  }
  return out;
}

inline std::string series_jsonl(const std::vector<CategorizedTweet>& tweets) {
  std::string out;
  for (const auto& t : tweets) {
    nlohmann::ordered_json j{{"id", t.id}, {"text", t.text}, {"stage1", t.stage1}};
    if (t.stage2) j["stage2"] = *t.stage2;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace rweet
