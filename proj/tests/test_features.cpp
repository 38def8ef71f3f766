#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "rweet/corpus.hpp"
#include "rweet/features.hpp"
#include "rweet/preprocess.hpp"
#include "rweet/sparse.hpp"
#include "support.hpp"

using namespace rweet;
using rweet::testing::TempDir;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an rweet::Error";
  return ErrorKind::kUsage;
}

std::vector<TokenList> random_corpus(std::mt19937& rng, std::size_t max_docs = 10) {
  static const char* kWords[] = {"need", "food", "water", "help", "shelter", "we", "blood", "_URL_", "#sandy", "go"};
  std::uniform_int_distribution<std::size_t> ndocs(1, max_docs), len(0, 7), word(0, 9);
  std::vector<TokenList> docs(ndocs(rng));
  for (auto& d : docs) {
    auto n = len(rng);
    for (std::size_t i = 0; i < n; ++i) d.push_back(kWords[word(rng)]);
  }
  docs[0] = {"need", "food", "now"};  // never an all-empty corpus
  return docs;
}

// Dense brute force: every n-gram of every document counted window by window.
struct DenseOracle {
  std::vector<std::map<std::string, double>> counts;
  std::map<std::string, std::size_t> df;

  DenseOracle(const std::vector<TokenList>& docs, int lo, int hi) {
    for (const auto& d : docs) {
      std::map<std::string, double> row;
      for (int n = lo; n <= hi; ++n)
        for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= d.size(); ++i) {
          std::string term;
          for (int k = 0; k < n; ++k) term += (k ? " " : "") + d[i + static_cast<std::size_t>(k)];
          row[term] += 1.0;
        }
      for (const auto& [term, c] : row) ++df[term];
      counts.push_back(row);
    }
  }

  double tf(std::size_t r, const std::string& term) const {
    auto it = counts[r].find(term);
    return it == counts[r].end() ? 0.0 : it->second;
  }

  double tfidf(std::size_t r, const std::string& term) const {
    double n = static_cast<double>(counts.size());
    return tf(r, term) * (std::log((1.0 + n) / (1.0 + static_cast<double>(df.at(term)))) + 1.0);
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// sparse

TEST(Sparse, TripletsRoundTripInAnyOrder) {
  std::vector<Triplet> t{{1, 2, 3.0}, {0, 0, 1.0}, {1, 0, -2.0}};
  auto m = SparseMatrix::from_triplets(3, 4, t);
  EXPECT_EQ(m.rows(), 3u);
  EXPECT_EQ(m.cols(), 4u);
  EXPECT_EQ(m.nnz(), 3u);
  EXPECT_EQ(m.at(1, 2), 3.0);
  EXPECT_EQ(m.at(2, 3), 0.0);
  EXPECT_EQ(m.triplets(), (std::vector<Triplet>{{0, 0, 1.0}, {1, 0, -2.0}, {1, 2, 3.0}}));
}

TEST(Sparse, RejectsBadEntries) {
  EXPECT_EQ(kind_of([] { SparseMatrix::from_triplets(1, 2, {{0, 5, 1.0}}); }), ErrorKind::kValidation);
  EXPECT_EQ(kind_of([] { SparseMatrix::from_triplets(1, 2, {{3, 0, 1.0}}); }), ErrorKind::kValidation);
  EXPECT_EQ(kind_of([] { SparseMatrix::from_triplets(1, 2, {{0, 0, 1.0}, {0, 0, 2.0}}); }), ErrorKind::kValidation);
  EXPECT_EQ(kind_of([] { SparseMatrix::from_triplets(1, 2, {{0, 0, 0.0}}); }), ErrorKind::kValidation);
  EXPECT_EQ(kind_of([] { SparseMatrix::from_triplets(1, 2, {{0, 0, NAN}}); }), ErrorKind::kValidation);
}

TEST(Sparse, SelectRows) {
  auto m = SparseMatrix::from_triplets(3, 2, {{0, 0, 1.0}, {1, 1, 2.0}, {2, 0, 3.0}});
  std::vector<std::size_t> keep{0, 2};
  auto s = m.select_rows(keep);
  EXPECT_EQ(s.rows(), 2u);
  EXPECT_EQ(s.at(1, 0), 3.0);
  EXPECT_EQ(m.select_rows(std::vector<std::size_t>{}).rows(), 0u);
}

TEST(Sparse, CosineAndNormalization) {
  auto m = SparseMatrix::from_triplets(3, 3, {{0, 0, 3.0}, {0, 1, 4.0}, {1, 0, 1.0}});
  EXPECT_NEAR(cosine_similarity(m.row(0), m.row(1)), 0.6, 1e-15);
  EXPECT_EQ(cosine_similarity(m.row(0), m.row(2)), 0.0);
  auto n = l2_normalize_rows(m);
  EXPECT_NEAR(n.row(0).squared_norm(), 1.0, 1e-12);
  EXPECT_EQ(n.row(2).nnz(), 0u);
  auto other = SparseMatrix::from_triplets(1, 5, {{0, 0, 1.0}});
  EXPECT_EQ(kind_of([&] { cosine_similarity(m.row(0), other.row(0)); }), ErrorKind::kValidation);
}

// ---------------------------------------------------------------------------
// n-grams and vocabularies

TEST(Features, ExtractNgrams) {
  TokenList t{"he", "loves", "me"};
  EXPECT_EQ(extract_ngrams(t, 1), (std::vector<std::string>{"he", "loves", "me"}));
  EXPECT_EQ(extract_ngrams(t, 2), (std::vector<std::string>{"he loves", "loves me"}));
  EXPECT_EQ(extract_ngrams(t, 3), (std::vector<std::string>{"he loves me"}));
  EXPECT_TRUE(extract_ngrams(t, 4).empty());
  EXPECT_EQ(extract_ngrams(t, NgramRange{1, 2}).size(), 5u);
  EXPECT_EQ(kind_of([] { NgramRange{2, 1}.validate(); }), ErrorKind::kUsage);
  EXPECT_EQ(kind_of([] { NgramRange{1, 4}.validate(); }), ErrorKind::kUsage);
}

TEST(Features, VocabularyOrderAndFrequencies) {
  std::vector<TokenList> docs{{"need", "food"}, {"need", "water", "need"}};
  auto v = build_vocabulary(docs, {1, 1});
  EXPECT_EQ(v.terms(), (std::vector<std::string>{"need", "food", "water"}));
  EXPECT_EQ(v.doc_freq(), (std::vector<std::size_t>{2, 1, 1}));
  EXPECT_EQ(v.doc_count(), 2u);
  EXPECT_NEAR(v.idf(0), std::log(3.0 / 3.0) + 1.0, 1e-15);
  EXPECT_NEAR(v.idf(1), std::log(3.0 / 2.0) + 1.0, 1e-15);
  auto filtered = build_vocabulary(docs, {1, 1}, 2);
  EXPECT_EQ(filtered.terms(), std::vector<std::string>{"need"});
  auto capped = build_vocabulary(docs, {1, 1}, 1, 0.5);
  EXPECT_EQ(capped.terms(), (std::vector<std::string>{"food", "water"}));
  EXPECT_EQ(kind_of([] { build_vocabulary(std::vector<TokenList>{}, {1, 1}); }), ErrorKind::kValidation);
  std::vector<TokenList> short_docs{{"need", "food"}, {"water"}};
  EXPECT_EQ(kind_of([&] { build_vocabulary(short_docs, {3, 3}); }), ErrorKind::kValidation);
}

TEST(Features, CosineWorkedExample) {
  std::vector<TokenList> docs{{"he", "loves", "me"}, {"he", "likes", "me"}};
  auto cosine = [&](NgramRange r) {
    auto m = vectorize_tf(docs, build_vocabulary(docs, r));
    return cosine_similarity(m.row(0), m.row(1));
  };
  EXPECT_NEAR(cosine({1, 1}), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(cosine({1, 2}), 0.4, 1e-12);
  EXPECT_NEAR(cosine({1, 3}), 1.0 / 3.0, 1e-12);
}

TEST(Features, SparseMatchesDenseOracle) {
  std::mt19937 rng(2024);
  static const NgramRange kRanges[] = {{1, 1}, {2, 2}, {3, 3}, {1, 2}, {2, 3}, {1, 3}};
  for (int trial = 0; trial < 100; ++trial) {
    auto docs = random_corpus(rng);
    auto range = kRanges[trial % 6];
    DenseOracle oracle(docs, range.lo, range.hi);
    auto vocab = build_vocabulary(docs, range);
    ASSERT_EQ(vocab.size(), oracle.df.size());
    auto tf = vectorize_tf(docs, vocab);
    auto tfidf = vectorize_tfidf(docs, vocab);
    ASSERT_EQ(tf.rows(), docs.size());
    for (std::size_t r = 0; r < docs.size(); ++r)
      for (std::size_t c = 0; c < vocab.size(); ++c) {
        const auto& term = vocab.terms()[c];
        EXPECT_EQ(vocab.doc_freq()[c], oracle.df.at(term));
        EXPECT_NEAR(tf.at(r, c), oracle.tf(r, term), 1e-12);
        EXPECT_NEAR(tfidf.at(r, c), oracle.tfidf(r, term), 1e-12);
      }
  }
}

TEST(Features, OutOfVocabularyIgnored) {
  std::vector<TokenList> train{{"need", "food"}};
  auto v = build_vocabulary(train, {1, 1});
  std::vector<TokenList> test{{"need", "blood", "need"}};
  auto m = vectorize_tf(test, v);
  EXPECT_EQ(m.at(0, 0), 2.0);
  EXPECT_EQ(m.nnz(), 1u);
}

// ---------------------------------------------------------------------------
// configurations

TEST(Features, TwentyFourCombosInNumberedOrder) {
  auto combos = enumerate_combos();
  ASSERT_EQ(combos.size(), 24u);
  for (std::size_t i = 0; i < combos.size(); ++i)
    for (std::size_t j = i + 1; j < combos.size(); ++j) EXPECT_NE(combos[i].digest(), combos[j].digest());
  auto c10 = combo(10);
  EXPECT_EQ(c10.weighting, Weighting::kTf);
  EXPECT_EQ(c10.ngrams, (NgramRange{1, 2}));
  EXPECT_TRUE(c10.append_rules);
  auto c13 = combo(13);
  EXPECT_EQ(c13.weighting, Weighting::kTfIdf);
  EXPECT_EQ(c13.ngrams, (NgramRange{1, 1}));
  EXPECT_FALSE(c13.append_rules);
  auto c17 = combo(17);
  EXPECT_EQ(c17.ngrams, (NgramRange{2, 3}));
  EXPECT_FALSE(c17.append_rules);
  EXPECT_EQ(combo(24).ngrams, (NgramRange{1, 3}));
  EXPECT_TRUE(combo(24).append_rules);
  EXPECT_EQ(kind_of([] { combo(25); }), ErrorKind::kUsage);
  EXPECT_EQ(kind_of([] { combo(0); }), ErrorKind::kUsage);
}

TEST(Features, RulePairsDifferByEighteenColumns) {
  auto d = synth_corpus(4, 50, LabelDomain::binary());
  auto clean = run_pipeline(d).corpus;
  auto texts = raw_texts(clean, d);
  std::vector<FeatureMatrix> built;
  for (const auto& cfg : enumerate_combos()) built.push_back(build_features(clean, texts, cfg));
  for (std::size_t block = 0; block < 24; block += 12)
    for (std::size_t i = 0; i < 6; ++i) {
      const auto& plain = built[block + i];
      const auto& ruled = built[block + i + 6];
      EXPECT_EQ(ruled.cols(), plain.cols() + 18);
      EXPECT_TRUE(ruled.has_rule_block());
      EXPECT_FALSE(plain.has_rule_block());
    }
}

TEST(Features, TransformNormalizesThenAppendsRules) {
  auto d = synth_corpus(9, 80, LabelDomain::binary());
  auto clean = run_pipeline(d).corpus;
  auto texts = raw_texts(clean, d);
  auto m = build_features(clean, texts, combo(22));
  auto rules = rule_features(texts);
  auto vocab_cols = m.vocab.size();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.matrix.row(r);
    double ngram_norm = 0.0;
    std::size_t rule_bits = 0;
    for (std::size_t k = 0; k < row.nnz(); ++k) {
      if (row.cols[k] < vocab_cols) {
        ngram_norm += row.values[k] * row.values[k];
      } else {
        EXPECT_EQ(row.values[k], 1.0);
        EXPECT_TRUE(rules[r].matched(static_cast<int>(row.cols[k] - vocab_cols) + 1));
        ++rule_bits;
      }
    }
    EXPECT_EQ(rule_bits, rules[r].count());
    if (ngram_norm > 0) {
      EXPECT_NEAR(ngram_norm, 1.0, 1e-9);
    }
  }
}

TEST(Features, CountsAreRawTf) {
  std::vector<TokenList> docs{{"need", "food", "need"}, {"food", "water"}};
  auto f = Featurizer::fit(docs, combo(13));
  RuleMatrix none(2);
  auto counts = f.counts(docs, none);
  EXPECT_EQ(counts.at(0, 0), 2.0);
  auto weighted = f.transform(docs, none);
  EXPECT_NEAR(weighted.row(0).squared_norm(), 1.0, 1e-12);
}

TEST(Features, RuleBlockAlignment) {
  FeatureMatrix m;
  m.matrix = SparseMatrix::from_triplets(2, 1, {{0, 0, 1.0}});
  m.row_ids = {"a", "b"};
  std::vector<RuleMatchVector> rules(2);
  rules[1].set(8);
  std::vector<std::string> wrong{"b", "a"};
  EXPECT_EQ(kind_of([&] { append_rule_features(m, rules, wrong); }), ErrorKind::kValidation);
  auto ok = append_rule_features(m, rules, m.row_ids);
  EXPECT_EQ(ok.cols(), 19u);
  EXPECT_EQ(ok.matrix.at(1, 1 + 7), 1.0);
  std::vector<RuleMatchVector> short_rules(1);
  EXPECT_EQ(kind_of([&] { append_rule_block(m.matrix, short_rules); }), ErrorKind::kValidation);
}

// ---------------------------------------------------------------------------
// persistence

TEST(Features, MatrixRoundTripIsExact) {
  TempDir tmp("features");
  auto d = synth_corpus(12, 120, LabelDomain::categorical());
  auto clean = run_pipeline(d).corpus;
  auto m = build_features(clean, raw_texts(clean, d), combo(24));
  save_matrix(tmp / "m", m);
  auto back = load_matrix(tmp / "m", m.digest());
  EXPECT_EQ(back, m);
  EXPECT_EQ(peek_matrix_digest(tmp / "m"), m.digest());
  auto bytes = rweet::testing::slurp(tmp / "m.spmat");
  save_matrix(tmp / "m", back);
  EXPECT_EQ(rweet::testing::slurp(tmp / "m.spmat"), bytes);
}

TEST(Features, StaleAndCorruptMatrices) {
  TempDir tmp("features-bad");
  auto d = synth_corpus(12, 60, LabelDomain::binary());
  auto clean = run_pipeline(d).corpus;
  auto m = build_features(clean, raw_texts(clean, d), combo(1));
  save_matrix(tmp / "m", m);
  FeatureMatrix other = m;
  other.config = combo(2);
  EXPECT_EQ(kind_of([&] { load_matrix(tmp / "m", other.digest()); }), ErrorKind::kStaleCache);
  write_file_atomic(tmp / "bad.spmat", "SPMAT v2 1 1 0 x\n");
  EXPECT_EQ(kind_of([&] { load_matrix(tmp / "bad"); }), ErrorKind::kFormat);
  auto body = rweet::testing::slurp(tmp / "m.spmat");
  write_file_atomic(tmp / "m.spmat", body + "0 0 1\n");
  EXPECT_EQ(kind_of([&] { load_matrix(tmp / "m"); }), ErrorKind::kFormat);
  EXPECT_EQ(kind_of([&] { load_matrix(tmp / "absent"); }), ErrorKind::kIo);
}

TEST(Features, FeaturizerRoundTrip) {
  TempDir tmp("featurizer");
  std::vector<TokenList> docs{{"need", "food"}, {"tab\there", "x"}};
  auto f = Featurizer::fit(docs, combo(16));
  save_featurizer(tmp / "f", f, "src");
  std::string src;
  auto back = load_featurizer(tmp / "f", &src);
  EXPECT_EQ(back, f);
  EXPECT_EQ(src, "src");
}
