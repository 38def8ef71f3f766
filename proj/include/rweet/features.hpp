#pragma once

// Bag-of-n-grams features: vocabularies, sparse tf / tf-idf matrices, L2
// normalization, the rule-feature block, the 24 feature configurations and
// the persisted matrix format.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "rweet/digest.hpp"
#include "rweet/error.hpp"
#include "rweet/io.hpp"
#include "rweet/preprocess.hpp"
#include "rweet/rules.hpp"
#include "rweet/sparse.hpp"

namespace rweet {

struct NgramRange {
  int lo = 1;
  int hi = 1;

  void validate() const {
    if (lo < 1 || hi < lo || hi > 3)
      fail(ErrorKind::kUsage, "n-gram range (" + std::to_string(lo) + "," + std::to_string(hi) +
                                  ") must satisfy 1 <= lo <= hi <= 3");
  }
  bool operator==(const NgramRange&) const = default;
};

// Space-joined contiguous windows of n tokens.
inline std::vector<std::string> extract_ngrams(std::span<const std::string> tokens, int n) {
  if (n < 1) fail(ErrorKind::kUsage, "n-gram order must be >= 1");
  std::vector<std::string> out;
  auto un = static_cast<std::size_t>(n);
  if (tokens.size() < un) return out;
  out.reserve(tokens.size() - un + 1);
  for (std::size_t i = 0; i + un <= tokens.size(); ++i) {
    std::string term = tokens[i];
    for (std::size_t k = 1; k < un; ++k) term.append(" ").append(tokens[i + k]);
    out.push_back(std::move(term));
  }
  return out;
}

// All n-grams for n in [lo, hi], grouped by n then by position.
inline std::vector<std::string> extract_ngrams(std::span<const std::string> tokens, NgramRange r) {
  std::vector<std::string> out;
  for (int n = r.lo; n <= r.hi; ++n) {
    auto grams = extract_ngrams(tokens, n);
    out.insert(out.end(), std::make_move_iterator(grams.begin()), std::make_move_iterator(grams.end()));
  }
  return out;
}

class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(NgramRange range, std::size_t doc_count, std::vector<std::string> terms,
             std::vector<std::size_t> doc_freq)
      : range_(range), doc_count_(doc_count), terms_(std::move(terms)), df_(std::move(doc_freq)) {
    if (terms_.size() != df_.size())
      fail(ErrorKind::kValidation, "vocabulary terms and document frequencies differ in length");
    for (std::size_t i = 0; i < terms_.size(); ++i)
      if (!index_.emplace(terms_[i], static_cast<std::uint32_t>(i)).second)
        fail(ErrorKind::kValidation, "duplicate vocabulary term '" + terms_[i] + "'");
  }

  std::size_t size() const { return terms_.size(); }
  NgramRange range() const { return range_; }
  std::size_t doc_count() const { return doc_count_; }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<std::size_t>& doc_freq() const { return df_; }

  std::optional<std::uint32_t> index_of(std::string_view term) const {
    auto it = index_.find(std::string(term));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // Smoothed inverse document frequency: ln((1+N)/(1+df)) + 1.
  double idf(std::size_t col) const {
    return std::log((1.0 + static_cast<double>(doc_count_)) /
                    (1.0 + static_cast<double>(df_[col]))) +
           1.0;
  }

  std::string digest() const {
    Digest d;
    d.add_int(range_.lo).add_int(range_.hi).add_int(static_cast<std::int64_t>(doc_count_));
    d.add_all(terms_);
    for (auto f : df_) d.add_int(static_cast<std::int64_t>(f));
    return d.hex();
  }

  bool operator==(const Vocabulary& o) const {
    return range_ == o.range_ && doc_count_ == o.doc_count_ && terms_ == o.terms_ && df_ == o.df_;
  }

 private:
  NgramRange range_;
  std::size_t doc_count_ = 0;
  std::vector<std::string> terms_;
  std::vector<std::size_t> df_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// Keeps terms whose document frequency lies in [min_df, max_df * N]; columns
// follow first appearance.
inline Vocabulary build_vocabulary(std::span<const TokenList> corpus, NgramRange range,
                                   std::size_t min_df = 1, double max_df = 1.0) {
  range.validate();
  if (corpus.empty()) fail(ErrorKind::kValidation, "cannot build a vocabulary from an empty corpus");
  std::vector<std::string> order;
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& doc : corpus) {
    std::unordered_set<std::string> seen;
    for (auto& term : extract_ngrams(doc, range)) {
      if (!seen.insert(term).second) continue;
      auto [it, inserted] = df.emplace(term, 0);
      if (inserted) order.push_back(term);
      ++it->second;
    }
  }
  double upper = max_df * static_cast<double>(corpus.size());
  std::vector<std::string> terms;
  std::vector<std::size_t> freqs;
  for (auto& term : order) {
    auto f = df[term];
    if (f < min_df || static_cast<double>(f) > upper + 1e-9) continue;
    terms.push_back(std::move(term));
    freqs.push_back(f);
  }
  if (terms.empty())
    fail(ErrorKind::kValidation, "vocabulary is empty after document-frequency filtering");
  return Vocabulary(range, corpus.size(), std::move(terms), std::move(freqs));
}

// Raw term counts; out-of-vocabulary terms are ignored.
inline SparseMatrix vectorize_tf(std::span<const TokenList> corpus, const Vocabulary& vocab) {
  SparseMatrix m(0, vocab.size());
  std::vector<std::pair<std::uint32_t, double>> entries;
  for (const auto& doc : corpus) {
    std::map<std::uint32_t, double> counts;
    for (const auto& term : extract_ngrams(doc, vocab.range()))
      if (auto c = vocab.index_of(term)) counts[*c] += 1.0;
    entries.assign(counts.begin(), counts.end());
    m.append_row(entries);
  }
  return m;
}

inline SparseMatrix apply_idf(SparseMatrix tf, const Vocabulary& vocab) {
  tf.scale_columns([&](std::uint32_t c) { return vocab.idf(c); });
  return tf;
}

// tf(r,c) * idf(c); document frequencies come from the vocabulary.
inline SparseMatrix vectorize_tfidf(std::span<const TokenList> corpus, const Vocabulary& vocab) {
  return apply_idf(vectorize_tf(corpus, vocab), vocab);
}

// ---------------------------------------------------------------------------
// Configurations

enum class Weighting { kTf, kTfIdf };

inline std::string_view weighting_name(Weighting w) { return w == Weighting::kTf ? "tf" : "tf-idf"; }

inline Weighting parse_weighting(std::string_view s) {
  if (s == "tf") return Weighting::kTf;
  if (s == "tf-idf" || s == "tfidf") return Weighting::kTfIdf;
  fail(ErrorKind::kUsage, "unknown vectorizer '" + std::string(s) + "' (expected tf or tf-idf)");
}

struct FeatureConfig {
  Weighting weighting = Weighting::kTf;
  NgramRange ngrams;
  bool append_rules = false;
  std::size_t min_df = 1;
  double max_df = 1.0;
  bool l2_normalize = true;

  std::string name() const {
    std::string s = std::string(weighting_name(weighting)) + "-" + std::to_string(ngrams.lo) +
                    "-" + std::to_string(ngrams.hi);
    if (append_rules) s += "-rules";
    return s;
  }

  std::string digest() const {
    Digest d;
    d.add("features-v1").add(weighting_name(weighting)).add_int(ngrams.lo).add_int(ngrams.hi);
    d.add_flag(append_rules).add_int(static_cast<std::int64_t>(min_df)).add_real(max_df);
    d.add_flag(l2_normalize);
    return d.hex();
  }

  bool operator==(const FeatureConfig&) const = default;
};

// The 24 combinations, numbered 1-24: tf 1-12 then tf-idf 13-24; within
// each, the six n-gram ranges without rule features, then with.
inline std::vector<FeatureConfig> enumerate_combos() {
  static constexpr NgramRange kRanges[] = {{1, 1}, {2, 2}, {3, 3}, {1, 2}, {2, 3}, {1, 3}};
  std::vector<FeatureConfig> out;
  for (auto w : {Weighting::kTf, Weighting::kTfIdf})
    for (bool rules : {false, true})
      for (auto r : kRanges) out.push_back({w, r, rules});
  return out;
}

inline FeatureConfig combo(int index) {
  if (index < 1 || index > 24)
    fail(ErrorKind::kUsage, "combo index " + std::to_string(index) + " outside [1,24]");
  return enumerate_combos()[static_cast<std::size_t>(index - 1)];
}

// ---------------------------------------------------------------------------
// Feature matrices

using RuleMatrix = std::vector<RuleMatchVector>;

struct FeatureMatrix {
  SparseMatrix matrix;
  Vocabulary vocab;
  FeatureConfig config;
  std::vector<std::string> row_ids;
  std::string source_digest;  // digest of the inputs the rows came from (clean corpus, fitted vocabulary)

  // Header digest and cache key: feature config + source corpus.
  std::string digest() const { return Digest().add(config.digest()).add(source_digest).hex(); }

  std::size_t rows() const { return matrix.rows(); }
  std::size_t cols() const { return matrix.cols(); }
  bool has_rule_block() const { return matrix.cols() == vocab.size() + kRuleCount; }

  bool operator==(const FeatureMatrix&) const = default;
};

inline SparseMatrix append_rule_block(const SparseMatrix& m, std::span<const RuleMatchVector> rules) {
  if (m.rows() != rules.size())
    fail(ErrorKind::kValidation, "rule feature rows (" + std::to_string(rules.size()) +
                                     ") do not match matrix rows (" + std::to_string(m.rows()) + ")");
  SparseMatrix out(0, m.cols() + kRuleCount);
  std::vector<std::pair<std::uint32_t, double>> entries;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto v = m.row(r);
    entries.clear();
    for (std::size_t k = 0; k < v.nnz(); ++k) entries.emplace_back(v.cols[k], v.values[k]);
    for (std::size_t b = 0; b < kRuleCount; ++b)
      if (rules[r].bits().test(b))
        entries.emplace_back(static_cast<std::uint32_t>(m.cols() + b), 1.0);
    out.append_row(entries);
  }
  return out;
}

// Appends the 18 binary rule columns, unscaled, after the n-gram block.
inline FeatureMatrix append_rule_features(FeatureMatrix m, std::span<const RuleMatchVector> rules,
                                          std::span<const std::string> rule_row_ids = {}) {
  if (!rule_row_ids.empty()) {
    if (rule_row_ids.size() != m.row_ids.size())
      fail(ErrorKind::kValidation, "rule feature row ids do not align with matrix rows");
    for (std::size_t i = 0; i < rule_row_ids.size(); ++i)
      if (rule_row_ids[i] != m.row_ids[i])
        fail(ErrorKind::kValidation, "rule feature row " + std::to_string(i) + " is '" +
                                         rule_row_ids[i] + "', matrix row is '" + m.row_ids[i] + "'");
  }
  m.matrix = append_rule_block(m.matrix, rules);
  m.config.append_rules = true;
  return m;
}

// A fitted feature extractor: the vocabulary learned on training documents
// plus the configuration that turns documents into rows.
class Featurizer {
 public:
  Featurizer() = default;
  Featurizer(FeatureConfig config, Vocabulary vocab)
      : config_(config), vocab_(std::move(vocab)) {}

  static Featurizer fit(std::span<const TokenList> docs, const FeatureConfig& config) {
    return Featurizer(config, build_vocabulary(docs, config.ngrams, config.min_df, config.max_df));
  }

  const FeatureConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  std::size_t cols() const { return vocab_.size() + (config_.append_rules ? kRuleCount : 0); }

  // Raw n-gram counts (+ rule bits when configured); the input for naive Bayes.
  SparseMatrix counts(std::span<const TokenList> docs, std::span<const RuleMatchVector> rules) const {
    auto tf = vectorize_tf(docs, vocab_);
    return config_.append_rules ? append_rule_block(tf, rules) : tf;
  }

  // Weighted, optionally normalized n-gram block (+ rule bits).
  SparseMatrix transform(std::span<const TokenList> docs, std::span<const RuleMatchVector> rules) const {
    auto m = vectorize_tf(docs, vocab_);
    if (config_.weighting == Weighting::kTfIdf) m = apply_idf(std::move(m), vocab_);
    if (config_.l2_normalize) m = l2_normalize_rows(std::move(m));
    return config_.append_rules ? append_rule_block(m, rules) : m;
  }

  std::string digest() const { return Digest().add(config_.digest()).add(vocab_.digest()).hex(); }

  bool operator==(const Featurizer&) const = default;

 private:
  FeatureConfig config_;
  Vocabulary vocab_;
};

inline std::vector<TokenList> token_lists(const CleanCorpus& c) {
  std::vector<TokenList> out;
  out.reserve(c.size());
  for (const auto& t : c.tweets) out.push_back(t.tokens);
  return out;
}

inline std::vector<std::string> row_ids(const CleanCorpus& c) {
  std::vector<std::string> out;
  out.reserve(c.size());
  for (const auto& t : c.tweets) out.push_back(t.id);
  return out;
}

// Fits on the whole corpus and transforms it. `raw_texts` feed the rule block
// and must align with the corpus rows.
inline FeatureMatrix build_features(const CleanCorpus& corpus, std::span<const std::string> raw_texts,
                                    const FeatureConfig& config) {
  auto docs = token_lists(corpus);
  auto featurizer = Featurizer::fit(docs, config);
  RuleMatrix rules;
  if (config.append_rules) {
    if (raw_texts.size() != corpus.size())
      fail(ErrorKind::kValidation, "raw texts do not align with the clean corpus");
    rules = rule_features(raw_texts);
  }
  return {featurizer.transform(docs, rules), featurizer.vocab(), config, row_ids(corpus),
          corpus.digest};
}

// ---------------------------------------------------------------------------
// Persistence
//
//   <base>.spmat   "SPMAT v1 <rows> <cols> <nnz> <digest>" then "row col value" lines
//   <base>.vocab   "index<TAB>term" per line
//   <base>.rows    one row id per line
//   <base>.meta    JSON: feature config, n-gram range, document count and frequencies

inline std::filesystem::path with_suffix(std::filesystem::path base, std::string_view suffix) {
  base += suffix;
  return base;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline nlohmann::json config_to_json(const FeatureConfig& c) {
  return {{"vectorizer", weighting_name(c.weighting)},
          {"ngram_lo", c.ngrams.lo},
          {"ngram_hi", c.ngrams.hi},
          {"append_rules", c.append_rules},
          {"min_df", c.min_df},
          {"max_df", c.max_df},
          {"l2_normalize", c.l2_normalize}};
}

inline FeatureConfig config_from_json(const nlohmann::json& j) {
  FeatureConfig c;
  c.weighting = parse_weighting(j.at("vectorizer").get<std::string>());
  c.ngrams = {j.at("ngram_lo").get<int>(), j.at("ngram_hi").get<int>()};
  c.append_rules = j.at("append_rules").get<bool>();
  c.min_df = j.at("min_df").get<std::size_t>();
  c.max_df = j.at("max_df").get<double>();
  c.l2_normalize = j.at("l2_normalize").get<bool>();
  return c;
}

inline void save_featurizer(const std::filesystem::path& base, const Featurizer& f,
                            std::string_view source_digest = {}) {
  std::ostringstream vocab;
  const auto& terms = f.vocab().terms();
  for (std::size_t i = 0; i < terms.size(); ++i) vocab << i << '\t' << terms[i] << '\n';
  nlohmann::json meta{{"config", config_to_json(f.config())},
                      {"config_digest", f.config().digest()},
                      {"doc_count", f.vocab().doc_count()},
                      {"doc_freq", f.vocab().doc_freq()},
                      {"source_digest", source_digest}};
  write_file_atomic(with_suffix(base, ".vocab"), vocab.str());
  write_file_atomic(with_suffix(base, ".meta"), meta.dump(1) + "\n");
}

inline Featurizer load_featurizer(const std::filesystem::path& base,
                                  std::string* source_digest = nullptr) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_file(with_suffix(base, ".meta")));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, base.string() + ".meta: " + e.what());
  }
  FeatureConfig config;
  std::size_t doc_count = 0;
  std::vector<std::size_t> df;
  try {
    config = config_from_json(meta.at("config"));
    doc_count = meta.at("doc_count").get<std::size_t>();
    df = meta.at("doc_freq").get<std::vector<std::size_t>>();
    if (source_digest) *source_digest = meta.value("source_digest", "");
    if (meta.at("config_digest").get<std::string>() != config.digest())
      fail(ErrorKind::kFormat, base.string() + ".meta: config digest does not match its fields");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, base.string() + ".meta: " + e.what());
  }
  std::vector<std::string> terms;
  std::istringstream vocab(read_file(with_suffix(base, ".vocab")));
  std::string line;
  while (std::getline(vocab, line)) {
    auto tab = line.find('\t');
    if (tab == std::string::npos || std::stoul(line.substr(0, tab)) != terms.size())
      fail(ErrorKind::kFormat, base.string() + ".vocab: bad line '" + line + "'");
    terms.push_back(line.substr(tab + 1));
  }
  return Featurizer(config, Vocabulary(config.ngrams, doc_count, std::move(terms), std::move(df)));
}

inline std::string serialize_spmat(const SparseMatrix& m, std::string_view digest) {
  std::ostringstream out;
  out << "SPMAT v1 " << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << ' ' << digest << '\n';
  for (const auto& t : m.triplets()) out << t.row << ' ' << t.col << ' ' << format_double(t.value) << '\n';
  return out.str();
}

struct SpmatHeader {
  std::size_t rows = 0, cols = 0, nnz = 0;
  std::string digest;
};

inline SpmatHeader parse_spmat_header(const std::string& line, const std::string& where) {
  std::istringstream hs(line);
  std::string magic, version;
  SpmatHeader h;
  std::string extra;
  if (!(hs >> magic >> version >> h.rows >> h.cols >> h.nnz >> h.digest) || magic != "SPMAT" ||
      version != "v1" || (hs >> extra))
    fail(ErrorKind::kFormat, where + ": bad SPMAT header '" + line + "'");
  return h;
}

inline std::string peek_matrix_digest(const std::filesystem::path& base) {
  auto in = open_input(with_suffix(base, ".spmat"));
  std::string header;
  std::getline(in, header);
  return parse_spmat_header(header, base.string() + ".spmat").digest;
}

inline void save_matrix(const std::filesystem::path& base, const FeatureMatrix& m) {
  std::ostringstream ids;
  for (const auto& id : m.row_ids) ids << id << '\n';
  save_featurizer(base, Featurizer(m.config, m.vocab), m.source_digest);
  write_file_atomic(with_suffix(base, ".rows"), ids.str());
  // Matrix last: its presence marks a complete artifact.
  write_file_atomic(with_suffix(base, ".spmat"), serialize_spmat(m.matrix, m.digest()));
}

// Throws kStaleCache when `expected_digest` is given and differs from the header.
inline FeatureMatrix load_matrix(const std::filesystem::path& base,
                                 std::optional<std::string_view> expected_digest = std::nullopt) {
  auto where = base.string() + ".spmat";
  auto in = open_input(with_suffix(base, ".spmat"));
  std::string line;
  std::getline(in, line);
  auto h = parse_spmat_header(line, where);
  if (expected_digest && *expected_digest != h.digest)
    fail(ErrorKind::kStaleCache, where + ": digest " + h.digest + " does not match expected " +
                                     std::string(*expected_digest));
  std::vector<Triplet> triplets;
  triplets.reserve(h.nnz);
  for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    Triplet t{};
    if (!(ls >> t.row >> t.col >> t.value) || t.row >= h.rows || t.col >= h.cols)
      fail(ErrorKind::kFormat, where + ":" + std::to_string(lineno) + ": bad triplet '" + line + "'");
    triplets.push_back(t);
  }
  if (triplets.size() != h.nnz)
    fail(ErrorKind::kFormat, where + ": header declares " + std::to_string(h.nnz) +
                                 " nonzeros, found " + std::to_string(triplets.size()));
  FeatureMatrix m;
  try {
    m.matrix = SparseMatrix::from_triplets(h.rows, h.cols, std::move(triplets));
  } catch (const Error& e) {
    fail(ErrorKind::kFormat, where + ": " + e.what());
  }
  auto f = load_featurizer(base, &m.source_digest);
  m.config = f.config();
  m.vocab = f.vocab();
  std::istringstream ids(read_file(with_suffix(base, ".rows")));
  for (std::string id; std::getline(ids, id);) m.row_ids.push_back(id);
  if (m.row_ids.size() != h.rows)
    fail(ErrorKind::kFormat, base.string() + ".rows: expected " + std::to_string(h.rows) + " ids");
  if (m.digest() != h.digest)
    fail(ErrorKind::kFormat, where + ": header digest does not match the companion files");
  return m;
}

}  // namespace rweet
