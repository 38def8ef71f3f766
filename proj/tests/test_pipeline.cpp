#include <gtest/gtest.h>

#include "rweet/pipeline.hpp"
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

// Trained once; every test works on copies.
const StagedClassifier& staged() {
  static const StagedClassifier s = train_staged(synth_corpus(31, 300, LabelDomain::binary()),
                                                 synth_corpus(32, 300, LabelDomain::categorical()),
                                                 PipelineConfig{}, combo(10));
  return s;
}

Dataset series_input() {
  auto d = synth_corpus(33, 250, LabelDomain::binary());
  for (auto& t : d.tweets) t.label.reset();
  return d;
}

FeatureMatrix tiny_matrix() {
  FeatureMatrix m;
  m.matrix = SparseMatrix::from_triplets(4, 2, {{0, 0, 1.0}, {1, 1, 2.0}, {2, 0, 3.0}, {3, 1, 4.0}});
  m.row_ids = {"a", "b", "c", "d"};
  return m;
}

}  // namespace

TEST(Filter, KeepsOnlyRweetRows) {
  auto m = tiny_matrix();
  std::vector<std::string> labels{"rweet", "not_rweet", "rweet", "not_rweet"};
  auto f = filter_rweets(m, labels);
  EXPECT_EQ(f.kept.row_ids, (std::vector<std::string>{"a", "c"}));
  EXPECT_EQ(f.removed, (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(f.kept.matrix.at(1, 0), 3.0);
  EXPECT_EQ(f.kept.rows() + f.removed.size(), m.rows());
}

TEST(Filter, AllAndNone) {
  auto m = tiny_matrix();
  std::vector<std::string> none(4, "not_rweet"), all(4, "rweet");
  EXPECT_EQ(filter_rweets(m, none).kept.rows(), 0u);
  EXPECT_EQ(filter_rweets(m, all).kept.matrix, m.matrix);
  std::vector<std::string> short_labels(3, "rweet");
  EXPECT_EQ(kind_of([&] { filter_rweets(m, short_labels); }), ErrorKind::kValidation);
}

TEST(Series, ConservationAndAlignment) {
  auto d = series_input();
  FeatureCache cache;
  auto r = run_series(d, staged(), cache);
  auto clean = run_pipeline(d, staged().preprocess).corpus;
  ASSERT_EQ(r.tweets.size(), clean.size());
  EXPECT_EQ(r.input_count, d.size());
  EXPECT_EQ(r.rweet_count + r.removed.size(), clean.size());
  EXPECT_GT(r.rweet_count, 0u);
  EXPECT_GT(r.removed.size(), 0u);
  const auto& cats = LabelDomain::categorical();
  for (std::size_t i = 0; i < r.tweets.size(); ++i) {
    const auto& t = r.tweets[i];
    EXPECT_EQ(t.id, clean.tweets[i].id);
    EXPECT_EQ(t.stage2.has_value(), t.stage1 == "rweet");
    if (t.stage2) {
      EXPECT_TRUE(cats.index_of(*t.stage2).has_value());
    }
    EXPECT_FALSE(t.text.empty());
  }
  for (auto i : r.removed) EXPECT_EQ(r.tweets[i].stage1, "not_rweet");
}

TEST(Series, WarmCacheSkipsComputation) {
  TempDir tmp("series-cache");
  auto d = series_input();
  FeatureCache cold(tmp.path());
  auto first = run_series(d, staged(), cold, "run");
  EXPECT_EQ(cold.computations(), 2u);
  EXPECT_EQ(cold.hits(), 0u);
  FeatureCache warm(tmp.path(), false);
  auto second = run_series(d, staged(), warm, "run");
  EXPECT_EQ(warm.computations(), 0u);
  EXPECT_EQ(warm.hits(), 2u);
  EXPECT_EQ(series_jsonl(second.tweets), series_jsonl(first.tweets));
}

TEST(Series, StaleCacheWithoutRecompute) {
  TempDir tmp("series-stale");
  auto d = series_input();
  FeatureCache cold(tmp.path());
  run_series(d, staged(), cold, "run");
  d.tweets[0].text += " need water";  // the clean corpus, and so the key, changes
  FeatureCache strict(tmp.path(), false);
  EXPECT_EQ(kind_of([&] { run_series(d, staged(), strict, "run"); }), ErrorKind::kStaleCache);
  FeatureCache empty(tmp / "nothing", false);
  EXPECT_EQ(kind_of([&] { run_series(d, staged(), empty, "run"); }), ErrorKind::kStaleCache);
  FeatureCache lenient(tmp.path());
  run_series(d, staged(), lenient, "run");
  EXPECT_EQ(lenient.computations(), 2u);
}

TEST(Series, NothingIdentifiedAsRweet) {
  auto s = staged();
  const auto& f = s.identifier.featurizer;
  // Bias toward not_rweet, zero weights: every row goes to class 0.
  LogRegModel never{LabelDomain::binary().labels(), f.cols(), std::vector<double>(2 * f.cols(), 0.0),
                    {1.0, 0.0}, {}, 0};
  s.identifier.model = std::make_shared<LogisticRegression>(never);
  FeatureCache cache;
  auto r = run_series(series_input(), s, cache);
  EXPECT_EQ(r.rweet_count, 0u);
  EXPECT_EQ(r.removed.size(), r.tweets.size());
  for (const auto& t : r.tweets) EXPECT_FALSE(t.stage2.has_value());
}

TEST(Series, UntrainedIsAnError) {
  StagedClassifier s;
  FeatureCache cache;
  EXPECT_EQ(kind_of([&] { run_series(series_input(), s, cache); }), ErrorKind::kValidation);
}

TEST(Series, JsonlShape) {
  std::vector<CategorizedTweet> t{{"1", "we need \"water\"", "rweet", "water"}, {"2", "sunny", "not_rweet", {}}};
  EXPECT_EQ(series_jsonl(t),
            "{\"id\":\"1\",\"text\":\"we need \\\"water\\\"\",\"stage1\":\"rweet\",\"stage2\":\"water\"}\n"
            "{\"id\":\"2\",\"text\":\"sunny\",\"stage1\":\"not_rweet\"}\n");
}

TEST(Staged, SaveLoadIsDeterministic) {
  TempDir tmp("staged");
  save_staged(tmp.path(), staged());
  auto back = load_staged(tmp.path());
  EXPECT_EQ(back.digest(), staged().digest());
  auto d = series_input();
  FeatureCache a, b;
  EXPECT_EQ(series_jsonl(run_series(d, back, a).tweets), series_jsonl(run_series(d, staged(), b).tweets));
  auto manifest = rweet::testing::slurp(tmp / "staged.json");
  save_staged(tmp.path(), back);
  EXPECT_EQ(rweet::testing::slurp(tmp / "staged.json"), manifest);
}

TEST(Staged, TrainingIsDeterministic) {
  auto again = train_staged(synth_corpus(31, 300, LabelDomain::binary()),
                            synth_corpus(32, 300, LabelDomain::categorical()), PipelineConfig{}, combo(10));
  EXPECT_EQ(again.digest(), staged().digest());
}

TEST(Staged, TamperedArtifactsAreRejected) {
  TempDir tmp("staged-bad");
  save_staged(tmp.path(), staged());
  auto vocab = rweet::testing::slurp(tmp / "identifier.vocab");
  write_file_atomic(tmp / "identifier.vocab", vocab + std::to_string(staged().identifier.featurizer.vocab().size()) +
                                                  "\textra term\n");
  EXPECT_EQ(kind_of([&] { load_staged(tmp.path()); }), ErrorKind::kValidation);
  save_staged(tmp.path(), staged());
  auto model = rweet::testing::slurp(tmp / "categorizer.model");
  auto pos = model.find("\nbias ");
  ASSERT_NE(pos, std::string::npos);
  auto end = model.find('\n', pos + 1);
  std::string bias = "\nbias";
  for (std::size_t i = 0; i < staged().categorizer.domain.size(); ++i) bias += " 123.5";
  model.replace(pos, end - pos, bias);
  write_file_atomic(tmp / "categorizer.model", model);
  EXPECT_EQ(kind_of([&] { load_staged(tmp.path()); }), ErrorKind::kValidation);
  EXPECT_EQ(kind_of([&] { load_staged(tmp / "missing"); }), ErrorKind::kIo);
}

TEST(Staged, WrongDomainIsRejected) {
  auto binary = synth_corpus(31, 100, LabelDomain::binary());
  EXPECT_EQ(kind_of([&] { train_staged(binary, binary, PipelineConfig{}, combo(10)); }), ErrorKind::kValidation);
}

TEST(Staged, NaiveBayesStages) {
  ClassifierSpec nb;
  nb.kind = ClassifierKind::kNaiveBayes;
  auto s = train_staged(synth_corpus(31, 200, LabelDomain::binary()),
                        synth_corpus(32, 200, LabelDomain::categorical()), PipelineConfig{}, combo(4), nb);
  TempDir tmp("staged-nb");
  save_staged(tmp.path(), s);
  EXPECT_EQ(load_staged(tmp.path()).digest(), s.digest());
  FeatureCache cache;
  auto r = run_series(series_input(), s, cache);
  EXPECT_EQ(r.rweet_count + r.removed.size(), r.tweets.size());
}
