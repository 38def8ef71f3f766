#pragma once

// Command-line front end. run_cli() is the whole program; tools/rweet.cpp
// only forwards argv and the standard streams.
//
// Exit codes: 0 success, 1 usage, 2 I/O, 3 validation, 4 stale cache.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rweet/corpus.hpp"
#include "rweet/error.hpp"
#include "rweet/eval.hpp"
#include "rweet/features.hpp"
#include "rweet/io.hpp"
#include "rweet/models.hpp"
#include "rweet/pipeline.hpp"
#include "rweet/preprocess.hpp"
#include "rweet/rules.hpp"

namespace rweet::cli {

// Flat "key = value" lines; '#' starts a comment line.
inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  auto trim = [](std::string s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty())
      fail(ErrorKind::kUsage, path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

struct Globals {
  std::string config;
  std::uint64_t seed = 1;
  std::string cache_dir = ".rweet-cache";
  bool verbose = false;
};

struct PipelineOptions {
  std::string ops;
  bool prose_order = false;
  double english_threshold = 0.15;
  std::size_t min_tokens = 2;

  void attach(CLI::App* app) {
    app->add_option("--ops", ops, "comma-separated preprocessing operations, in order");
    app->add_flag("--prose-order", prose_order, "punctuation removal before tag generalization");
    app->add_option("--english-threshold", english_threshold, "minimum English word ratio");
    app->add_option("--min-tokens", min_tokens, "drop tweets with fewer tokens");
  }

  PipelineConfig resolve() const {
    if (prose_order && !ops.empty()) fail(ErrorKind::kUsage, "--ops and --prose-order are exclusive");
    auto cfg = prose_order ? PipelineConfig::prose_order() : PipelineConfig{};
    if (!ops.empty()) cfg.ops = PipelineConfig::parse_ops(ops);
    cfg.english_threshold = english_threshold;
    cfg.min_tokens = min_tokens;
    cfg.validate();
    return cfg;
  }
};

struct FeatureOptions {
  int combo = 0;
  std::string vectorizer;
  int ngram_lo = 0;
  int ngram_hi = 0;
  bool rules = false;
  std::size_t min_df = 1;
  double max_df = 1.0;
  int default_combo = 0;

  void attach(CLI::App* app, int fallback) {
    default_combo = fallback;
    app->add_option("--combo", combo, "feature combination 1-24");
    app->add_option("--vectorizer", vectorizer, "tf or tf-idf");
    app->add_option("--ngram-lo", ngram_lo, "smallest n-gram order");
    app->add_option("--ngram-hi", ngram_hi, "largest n-gram order");
    app->add_flag("--rules", rules, "append the 18 rule features");
    app->add_option("--min-df", min_df, "minimum document frequency");
    app->add_option("--max-df", max_df, "maximum document frequency fraction");
  }

  bool explicit_fields() const { return !vectorizer.empty() || ngram_lo != 0 || ngram_hi != 0 || rules; }

  // Index when chosen by --combo (or the fallback), nullopt for explicit fields.
  std::optional<int> combo_index() const {
    if (combo != 0) return combo;
    if (explicit_fields()) return std::nullopt;
    if (default_combo == 0) fail(ErrorKind::kUsage, "give --combo N or explicit feature flags");
    return default_combo;
  }

  FeatureConfig resolve() const {
    if (combo != 0 && explicit_fields())
      fail(ErrorKind::kUsage, "--combo cannot be combined with explicit feature flags");
    FeatureConfig cfg;
    if (auto idx = combo_index()) {
      cfg = rweet::combo(*idx);
    } else {
      cfg.weighting = parse_weighting(vectorizer.empty() ? "tf" : vectorizer);
      cfg.ngrams = {ngram_lo == 0 ? 1 : ngram_lo, ngram_hi == 0 ? std::max(1, ngram_lo) : ngram_hi};
      cfg.append_rules = rules;
    }
    cfg.ngrams.validate();
    cfg.min_df = min_df;
    cfg.max_df = max_df;
    if (min_df < 1 || !(max_df > 0.0 && max_df <= 1.0))
      fail(ErrorKind::kUsage, "document-frequency bounds need min-df >= 1 and 0 < max-df <= 1");
    return cfg;
  }

  std::string artifact_name() const {
    auto idx = combo_index();
    return idx ? "combo" + std::to_string(*idx) : resolve().name();
  }
};

struct TrainOptions {
  std::string classifier = "lr";
  TrainConfig train;
  double alpha = 1.0;

  void attach(CLI::App* app) {
    app->add_option("--classifier", classifier, "lr or nb");
    app->add_option("--lr", train.learning_rate, "gradient-descent learning rate");
    app->add_option("--l2", train.l2, "L2 penalty");
    app->add_option("--epochs", train.max_epochs, "maximum epochs");
    app->add_option("--tol", train.tolerance, "loss-change stopping tolerance");
    app->add_option("--alpha", alpha, "naive Bayes smoothing");
  }

  ClassifierSpec resolve(std::uint64_t seed) const {
    ClassifierSpec spec{parse_classifier(classifier), train, alpha};
    spec.train.seed = seed;
    spec.train.validate();
    if (!(alpha > 0.0)) fail(ErrorKind::kUsage, "--alpha must be > 0");
    return spec;
  }
};

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(std::vector<std::string> args);

 private:
  void note(const std::string& msg) const { err_ << msg << '\n'; }
  void debug(const std::string& msg) const {
    if (g_.verbose) err_ << "[verbose] " << msg << '\n';
  }

  std::filesystem::path cache_dir() const { return g_.cache_dir; }
  std::string stem() const { return std::filesystem::path(input_).stem().string(); }

  void write_output(const std::string& bytes) {
    if (output_.empty()) out_ << bytes;
    else write_file_atomic(output_, bytes);
  }

  CleanCorpus cached_clean(const Dataset& d, const PipelineConfig& cfg, bool compute_on_miss);

  void cmd_synth();
  void cmd_preprocess();
  void cmd_featurize();
  void cmd_rules_classify();
  void cmd_train();
  void cmd_evaluate();
  void cmd_series();

  std::ostream& out_;
  std::ostream& err_;
  Globals g_;
  std::string input_, output_, domain_ = "binary";
  std::string binary_path_, categorical_path_, model_dir_, report_path_;
  std::size_t synth_size_ = 600;
  int folds_ = 5;
  bool resubstitution_ = false, no_recompute_ = false;
  PipelineOptions pipeline_;
  FeatureOptions features_;
  TrainOptions train_;
};

// Clean corpus for `d` under `cfg` from <cache>/<stem>.clean. A missing or
// stale file is a stale-cache error unless `compute_on_miss`.
inline CleanCorpus Runner::cached_clean(const Dataset& d, const PipelineConfig& cfg, bool compute_on_miss) {
  auto path = cache_dir() / (stem() + ".clean");
  auto key = clean_cache_key(cfg, d);
  bool present = std::filesystem::exists(path);
  if (present && peek_clean_digest(path) == key) {
    debug("clean corpus cache hit: " + path.string());
    return load_clean(path, key);
  }
  if (!compute_on_miss)
    fail(ErrorKind::kStaleCache, path.string() + (present ? ": cached clean corpus is stale" : ": no cached clean corpus") +
                                     "; run 'preprocess' with the same options first");
  auto corpus = run_pipeline(d, cfg).corpus;
  save_clean(path, corpus);
  return corpus;
}

inline void Runner::cmd_synth() {
  auto domain = LabelDomain::by_name(domain_);
  auto d = synth_corpus(g_.seed, synth_size_, domain);
  std::string bytes;
  for (const auto& t : d.tweets) bytes += tweet_record(t) + "\n";
  write_output(bytes);
  debug("wrote " + std::to_string(d.size()) + " synthetic tweets");
}

inline void Runner::cmd_preprocess() {
  auto cfg = pipeline_.resolve();
  auto d = load_dataset(input_, LabelDomain::by_name(domain_));
  auto [corpus, report] = run_pipeline(d, cfg);
  auto path = cache_dir() / (stem() + ".clean");
  if (std::filesystem::exists(path) && peek_clean_digest(path) == corpus.digest) {
    out_ << "cache hit: " << path.string() << "\n";
  } else {
    save_clean(path, corpus);
  }
  if (!output_.empty()) save_clean(output_, corpus);
  for (const auto& w : report.warnings) note("warning: " + w);
  auto text = report.render();
  write_file_atomic(cache_dir() / (stem() + ".report.txt"), text);
  out_ << text;
  auto stats = dataset_stats(d);
  for (const auto& [label, n] : stats.counts) out_ << "class " << label << ": " << n << "\n";
}

inline void Runner::cmd_featurize() {
  auto pcfg = pipeline_.resolve();
  auto fcfg = features_.resolve();
  auto d = load_dataset(input_, LabelDomain::by_name(domain_));
  auto clean = cached_clean(d, pcfg, false);
  FeatureMatrix shell;
  shell.config = fcfg;
  shell.source_digest = clean.digest;
  FeatureCache cache(cache_dir());
  auto base = stem() + "." + features_.artifact_name();
  auto m = cache.get(base, shell.digest(), [&] {
    note("note: vocabulary fit on the full corpus (cache precomputation; cross-validation refits per fold)");
    return build_features(clean, raw_texts(clean, d), fcfg);
  });
  if (cache.hits() > 0) out_ << "cache hit: " << (cache_dir() / base).string() << "\n";
  out_ << "features " << fcfg.name() << ": " << m.rows() << " rows, " << m.cols() << " columns, "
       << m.matrix.nnz() << " nonzeros\n";
}

inline void Runner::cmd_rules_classify() {
  auto domain = LabelDomain::by_name(domain_);
  auto d = load_dataset(input_, domain);
  std::string bytes;
  std::size_t flagged = 0;
  for (const auto& t : d.tweets) {
    auto bits = match_tweet(t.text);
    nlohmann::ordered_json j{{"id", t.id}, {"text", t.text}};
    if (t.label) j["label"] = *t.label;
    j["rule_label"] = rule_classify(t.text);
    j["rule_bits"] = bits.to_vector();
    flagged += bits.any() ? 1 : 0;
    bytes += j.dump() + "\n";
  }
  write_output(bytes);
  debug(std::to_string(flagged) + " of " + std::to_string(d.size()) + " tweets matched a rule");
}

inline void Runner::cmd_train() {
  auto pcfg = pipeline_.resolve();
  auto fcfg = features_.resolve();
  auto spec = train_.resolve(g_.seed);
  auto d1 = load_dataset(binary_path_, LabelDomain::binary());
  auto d2 = load_dataset(categorical_path_, LabelDomain::categorical());
  auto staged = train_staged(d1, d2, pcfg, fcfg, spec);
  std::filesystem::path dir = model_dir_.empty() ? cache_dir() / "staged" : std::filesystem::path(model_dir_);
  save_staged(dir, staged);
  out_ << "trained " << spec.make()->name() << " on " << fcfg.name() << ": staged model " << staged.digest()
       << " written to " << dir.string() << "\n";
}

inline void Runner::cmd_evaluate() {
  auto pcfg = pipeline_.resolve();
  auto fcfg = features_.resolve();
  auto spec = train_.resolve(g_.seed);
  auto d = load_dataset(input_, LabelDomain::by_name(domain_));
  auto clean = cached_clean(d, pcfg, true);
  auto data = make_labeled(clean, d);
  MetricsReport report;
  std::ostringstream text;
  text << "classifier " << spec.make()->name() << ", features " << fcfg.name() << ", " << data.size()
       << " tweets\n";
  if (resubstitution_) {
    text << "mode: resubstitution (train and predict on the same rows)\n\n";
    report = resubstitution(spec, data, fcfg);
  } else {
    text << "mode: stratified " << folds_ << "-fold cross-validation, seed " << g_.seed << "\n\n";
    auto cv = cross_validate(spec, data, fcfg, folds_, g_.seed);
    report = cv.pooled;
    text << render_report(report) << "\n";
    for (std::size_t f = 0; f < cv.folds.size(); ++f)
      text << "fold " << f + 1 << " accuracy " << percent(cv.folds[f].accuracy) << "\n";
  }
  if (resubstitution_) text << render_report(report);
  out_ << text.str();
  if (!report_path_.empty()) write_file_atomic(report_path_, report_to_json(report).dump(2) + "\n");
}

inline void Runner::cmd_series() {
  auto staged = load_staged(model_dir_.empty() ? cache_dir() / "staged" : std::filesystem::path(model_dir_));
  auto d = load_dataset(input_, LabelDomain::by_name(domain_));
  FeatureCache cache(cache_dir(), !no_recompute_);
  auto result = run_series(d, staged, cache, stem());
  write_output(series_jsonl(result.tweets));
  if (cache.hits() > 0) note("cache hit: " + std::to_string(cache.hits()) + " feature matrices reused");
  note("series: " + std::to_string(result.input_count) + " input, " + std::to_string(result.tweets.size()) +
       " after preprocessing, " + std::to_string(result.rweet_count) + " rweets categorized");
  debug("featurizations computed: " + std::to_string(cache.computations()));
}

namespace detail {

// The chain of subcommand names named on the command line.
inline std::vector<CLI::App*> subcommand_chain(CLI::App& app, const std::vector<std::string>& args,
                                               std::vector<std::size_t>& positions) {
  std::vector<CLI::App*> chain{&app};
  for (std::size_t i = 0; i < args.size(); ++i) {
    auto* cur = chain.back();
    for (auto* sub : cur->get_subcommands([](CLI::App*) { return true; }))
      if (sub->get_name() == args[i]) {
        chain.push_back(sub);
        positions.push_back(i);
        break;
      }
  }
  return chain;
}

inline CLI::Option* find_option(CLI::App* app, const std::string& key) {
  return app->get_option_no_throw("--" + key);
}

}  // namespace detail

inline int Runner::run(std::vector<std::string> args) {
  CLI::App app{"rweet: identify and categorize help-request tweets", "rweet"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.add_option("--config", g_.config, "key=value file; command-line flags override it");
  app.add_option("--seed", g_.seed, "seed for synthesis, fold shuffling and gradient checks");
  app.add_option("--cache-dir", g_.cache_dir, "directory for cached corpora and matrices");
  app.add_flag("--verbose", g_.verbose, "extra diagnostics on stderr");

  auto* synth = app.add_subcommand("synth", "generate a labeled synthetic corpus (JSONL)");
  synth->add_option("--domain", domain_, "binary or categorical");
  synth->add_option("--size", synth_size_, "number of tweets");
  synth->add_option("--out", output_, "output path (default stdout)");

  auto* pre = app.add_subcommand("preprocess", "clean a corpus and cache the result");
  pre->add_option("input", input_, "JSONL dataset")->required();
  pre->add_option("--domain", domain_, "binary or categorical");
  pre->add_option("--out", output_, "also write the clean corpus here");
  pipeline_.attach(pre);

  auto* feat = app.add_subcommand("featurize", "build and cache a feature matrix");
  feat->add_option("input", input_, "JSONL dataset (already preprocessed)")->required();
  feat->add_option("--domain", domain_, "binary or categorical");
  pipeline_.attach(feat);
  features_.attach(feat, 0);

  auto* rules = app.add_subcommand("rules", "rule-based identification");
  rules->require_subcommand(1);
  auto* classify = rules->add_subcommand("classify", "label each tweet by the 18 patterns");
  classify->add_option("input", input_, "JSONL dataset")->required();
  classify->add_option("--domain", domain_, "label domain of any labels present");
  classify->add_option("--out", output_, "output path (default stdout)");

  auto* train = app.add_subcommand("train", "train the two-stage classifier");
  train->add_option("--binary", binary_path_, "rweet/not_rweet dataset")->required();
  train->add_option("--categorical", categorical_path_, "six-category dataset")->required();
  train->add_option("--model", model_dir_, "output directory (default <cache>/staged)");
  pipeline_.attach(train);
  features_.attach(train, 10);
  train_.attach(train);

  auto* eval = app.add_subcommand("evaluate", "cross-validate one stage and print metrics");
  eval->add_option("input", input_, "labeled JSONL dataset")->required();
  eval->add_option("--domain", domain_, "binary or categorical");
  eval->add_option("--folds", folds_, "k for stratified k-fold");
  eval->add_flag("--resubstitution", resubstitution_, "train and score on the same rows");
  eval->add_option("--report", report_path_, "write the JSON metrics record here");
  pipeline_.attach(eval);
  features_.attach(eval, 10);
  train_.attach(eval);

  auto* series = app.add_subcommand("series", "run identification then categorization");
  series->add_option("input", input_, "JSONL dataset")->required();
  series->add_option("--domain", domain_, "label domain of any labels present");
  series->add_option("--model", model_dir_, "staged model directory (default <cache>/staged)");
  series->add_option("--out", output_, "output JSONL (default stdout)");
  series->add_flag("--no-recompute", no_recompute_, "fail instead of recomputing stale features");

  try {
    // Config values go in front of the user's own arguments so that, with
    // last-wins options, flags override the file.
    std::optional<std::string> config_path;
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
      if (args[i] == "--config") config_path = args[i + 1];
      else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    if (args.size() && args.back() == "--config") fail(ErrorKind::kUsage, "--config needs a path");
    if (config_path) {
      std::vector<std::size_t> positions;
      auto chain = detail::subcommand_chain(app, args, positions);
      std::vector<std::vector<std::string>> inject(chain.size());
      for (const auto& [key, value] : read_config_file(*config_path)) {
        if (key == "config") continue;
        bool used = false;
        for (std::size_t level = chain.size(); level-- > 0 && !used;) {
          auto* opt = detail::find_option(chain[level], key);
          if (!opt) continue;
          used = true;
          if (opt->get_expected_min() == 0) {
            if (value == "true" || value == "1" || value == "yes") inject[level].push_back("--" + key);
          } else {
            inject[level].push_back("--" + key);
            inject[level].push_back(value);
          }
        }
        if (!used) note("warning: config key '" + key + "' does not apply to this command");
      }
      std::vector<std::string> merged = inject[0];
      std::size_t cursor = 0;
      for (std::size_t level = 1; level < chain.size(); ++level) {
        auto pos = positions[level - 1];
        merged.insert(merged.end(), args.begin() + static_cast<std::ptrdiff_t>(cursor),
                      args.begin() + static_cast<std::ptrdiff_t>(pos) + 1);
        merged.insert(merged.end(), inject[level].begin(), inject[level].end());
        cursor = pos + 1;
      }
      merged.insert(merged.end(), args.begin() + static_cast<std::ptrdiff_t>(cursor), args.end());
      args = std::move(merged);
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
      out_ << app.help();
      return 0;
    } catch (const CLI::CallForAllHelp&) {
      out_ << app.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::ParseError& e) {
      err_ << "usage error: " << e.what() << "\n";
      return exit_code(ErrorKind::kUsage);
    }

    auto start = std::chrono::steady_clock::now();
    if (*synth) cmd_synth();
    else if (*pre) cmd_preprocess();
    else if (*feat) cmd_featurize();
    else if (*classify) cmd_rules_classify();
    else if (*train) cmd_train();
    else if (*eval) cmd_evaluate();
    else if (*series) cmd_series();
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    debug("done in " + std::to_string(ms.count()) + " ms");
    return 0;
  } catch (const Error& e) {
    err_ << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err_ << "error: " << e.what() << "\n";
    return exit_code(ErrorKind::kIo);
  }
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  Runner runner(out, err);
  return runner.run(args);
}

}  // namespace rweet::cli
