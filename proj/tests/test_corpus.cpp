#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "support.hpp"

using namespace inductgcn;
using namespace testing_support;

namespace {

Corpus load(const std::string &train, const std::string &test) {
  std::istringstream tr(train), te(test);
  return load_corpus(tr, te);
}

Corpus numbered_train_corpus(std::size_t n, std::size_t classes = 2) {
  Corpus c;
  for (std::size_t k = 0; k < classes; ++k) c.labels.push_back("c" + std::to_string(k));
  for (std::size_t i = 0; i < n; ++i) {
    c.documents.push_back({i, {"w" + std::to_string(i % 5), "x"}, c.labels[i % classes], Split::train});
  }
  c.documents.push_back({n, {"x"}, c.labels[0], Split::test});
  return c;
}

} // namespace

TEST(Tokenize, SplitsPunctuationAndLowercases) {
  EXPECT_EQ(tokenize("Profits ROSE, sharply!"),
            (std::vector<std::string>{"profits", "rose", ",", "sharply", "!"}));
  EXPECT_EQ(tokenize("(a)b.c?"), (std::vector<std::string>{"(", "a", ")", "b", ".", "c", "?"}));
}

TEST(Tokenize, KeepsOnlyInternalApostrophes) {
  EXPECT_EQ(tokenize("don't 'quoted' dogs'"), (std::vector<std::string>{"don't", "quoted", "dogs"}));
}

TEST(Tokenize, StripsOtherSymbols) {
  EXPECT_EQ(tokenize("a-b  c_d\t$5%"), (std::vector<std::string>{"a", "b", "c", "d", "5"}));
  EXPECT_EQ(tokenize("MiXeD", false), (std::vector<std::string>{"MiXeD"}));
  EXPECT_TRUE(tokenize("  ;;; ").empty());
}

TEST(LoadCorpus, MapsFieldsDirectly) {
  const auto c = load("earn\tprofits rose sharply\nacq\tbuys company\n", "earn\tprofits fell\n");
  ASSERT_EQ(c.documents.size(), 3u);
  EXPECT_EQ(c.labels, (std::vector<std::string>{"earn", "acq"}));
  EXPECT_EQ(c.documents[0].label, "earn");
  EXPECT_EQ(c.documents[0].tokens, (std::vector<std::string>{"profits", "rose", "sharply"}));
  EXPECT_EQ(c.documents[0].split, Split::train);
  EXPECT_EQ(c.documents[2].split, Split::test);
  std::set<std::size_t> ids;
  for (const auto &d : c.documents) ids.insert(d.id);
  EXPECT_EQ(ids.size(), 3u);
}

TEST(LoadCorpus, EmptyTrainingFileIsAnError) {
  try {
    load("", "a\tx\n");
    FAIL();
  } catch (const ParseError &e) {
    EXPECT_NE(std::string(e.what()).find("no training documents"), std::string::npos);
  }
}

TEST(LoadCorpus, UnknownTestLabelIsListed) {
  try {
    load("a\tx\nb\ty\n", "never-seen\tz\n");
    FAIL();
  } catch (const ParseError &e) {
    EXPECT_NE(std::string(e.what()).find("never-seen"), std::string::npos);
  }
}

TEST(LoadCorpus, MissingTabNamesLine) {
  try {
    load("a\tx\nno tab here\n", "");
    FAIL();
  } catch (const ParseError &e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos);
  }
}

TEST(LoadCorpus, StopwordFileIgnoresComments) {
  std::istringstream in("# header\nthe\n\n  a \n#x\n");
  const auto sw = parse_stopwords(in);
  EXPECT_EQ(sw, (std::unordered_set<std::string>{"the", "a"}));
}

TEST(LoadCorpus, BundledStopwordListHas179Words) {
  const auto sw = load_stopwords(INDUCTGCN_DEFAULT_STOPWORDS);
  EXPECT_EQ(sw.size(), 179u);
  EXPECT_TRUE(sw.contains("the"));
  EXPECT_TRUE(sw.contains("don't"));
}

TEST(Preprocess, MinFrequencyCountsTrainingOccurrences) {
  const auto c = load("x\ta b b\ny\tb c\n", "x\ta b d\n");
  const auto pre = preprocess(c, {});
  EXPECT_EQ(pre.vocab.words().size(), 1u);
  EXPECT_EQ(pre.vocab.word(0), "b");
  // Test tokens outside the training vocabulary are removed silently.
  EXPECT_EQ(pre.corpus.documents.back().tokens, (std::vector<std::string>{"b"}));
}

TEST(Preprocess, RemovesStopwords) {
  const auto c = load("x\tthe cat the cat\n", "");
  PreprocessConfig cfg;
  cfg.stopwords = {"the"};
  const auto pre = preprocess(c, cfg);
  EXPECT_EQ(pre.vocab.size(), 1u);
  EXPECT_EQ(pre.vocab.word(0), "cat");
  EXPECT_EQ(pre.corpus.documents[0].tokens, (std::vector<std::string>{"cat", "cat"}));
}

TEST(Preprocess, DropsEmptyTrainingDocsButKeepsEmptyTestDocs) {
  const auto c = load("x\tk k\ny\tunique\n", "x\tnothing known\n");
  const auto pre = preprocess(c, {});
  EXPECT_EQ(pre.dropped_training_documents, 1u);
  EXPECT_EQ(pre.corpus.count(Split::train), 1u);
  ASSERT_EQ(pre.corpus.count(Split::test), 1u);
  EXPECT_TRUE(pre.corpus.test_documents()[0].tokens.empty());
}

TEST(Preprocess, AllTrainingEmptyIsFatal) {
  const auto c = load("x\tone\ny\ttwo\n", "");
  EXPECT_THROW(preprocess(c, {}), Error);
}

TEST(Preprocess, VocabularyOrderIsFirstAppearance) {
  const auto c = load("x\tzeta alpha zeta\ny\talpha mid mid\n", "");
  const auto pre = preprocess(c, {});
  EXPECT_EQ(std::vector<std::string>(pre.vocab.words().begin(), pre.vocab.words().end()),
            (std::vector<std::string>{"zeta", "alpha", "mid"}));
}

TEST(Preprocess, IdempotentAndIndependentOfTestSplit) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    Corpus c;
    c.labels = {"a"};
    for (std::size_t i = 0; i < 12; ++i) {
      Document d{i, {}, "a", i < 8 ? Split::train : Split::test};
      const auto len = 1 + rng.uniform_index(6);
      for (std::size_t k = 0; k < len; ++k) d.tokens.push_back("t" + std::to_string(rng.uniform_index(9)));
      c.documents.push_back(d);
    }
    PreprocessConfig cfg;
    cfg.stopwords = {"t0"};
    Vocabulary first_vocab;
    try {
      const auto once = preprocess(c, cfg);
      const auto twice = preprocess(once.corpus, cfg);
      EXPECT_EQ(once.vocab, twice.vocab);
      ASSERT_EQ(once.corpus.documents.size(), twice.corpus.documents.size());
      for (std::size_t i = 0; i < once.corpus.documents.size(); ++i) {
        EXPECT_EQ(once.corpus.documents[i].tokens, twice.corpus.documents[i].tokens);
      }
      first_vocab = once.vocab;
    } catch (const Error &) {
      continue; // every training document filtered away; nothing to compare
    }
    Corpus replaced = c;
    for (auto &d : replaced.documents) {
      if (d.split == Split::test) d.tokens = {"brand", "new", "t1", "t1", "t1"};
    }
    EXPECT_EQ(preprocess(replaced, cfg).vocab, first_vocab);
  }
}

TEST(Subsample, FivePercentOfHundred) {
  const auto r = subsample_and_split(numbered_train_corpus(100), 0.05, 0.1, 1);
  EXPECT_EQ(r.corpus.count(Split::train), 5u);
  EXPECT_EQ(r.corpus.count(Split::val), 0u);
  EXPECT_EQ(r.corpus.count(Split::test), 1u);
}

TEST(Subsample, ValidationIsFloorOfRatio) {
  const auto r = subsample_and_split(numbered_train_corpus(274), 1.0, 0.1, 1);
  EXPECT_EQ(r.corpus.count(Split::val), 27u);
  EXPECT_EQ(r.corpus.count(Split::train), 247u);
}

TEST(Subsample, DeterministicForSeed) {
  const auto c = numbered_train_corpus(60);
  const auto ids = [](const Corpus &x) {
    std::vector<std::pair<std::size_t, Split>> out;
    for (const auto &d : x.documents) out.emplace_back(d.id, d.split);
    return out;
  };
  EXPECT_EQ(ids(subsample_and_split(c, 0.3, 0.2, 9).corpus), ids(subsample_and_split(c, 0.3, 0.2, 9).corpus));
  EXPECT_NE(ids(subsample_and_split(c, 0.3, 0.2, 9).corpus), ids(subsample_and_split(c, 0.3, 0.2, 10).corpus));
}

TEST(Subsample, FullFractionWithoutValidationIsIdentity) {
  const auto c = numbered_train_corpus(31);
  const auto r = subsample_and_split(c, 1.0, 0.0, 4);
  ASSERT_EQ(r.corpus.documents.size(), c.documents.size());
  for (std::size_t i = 0; i < c.documents.size(); ++i) {
    EXPECT_EQ(r.corpus.documents[i].id, c.documents[i].id);
    EXPECT_EQ(r.corpus.documents[i].split, c.documents[i].split);
    EXPECT_EQ(r.corpus.documents[i].tokens, c.documents[i].tokens);
  }
}

TEST(Subsample, WarnsWhenAClassVanishes) {
  // One document of class c1 among 40; a 1-document subsample drops a class.
  Corpus c = numbered_train_corpus(40, 1);
  c.labels.push_back("rare");
  c.documents[3].label = "rare";
  const auto r = subsample_and_split(c, 0.025, 0.0, 0);
  EXPECT_EQ(r.corpus.count(Split::train), 1u);
  EXPECT_EQ(r.empty_classes.size(), 1u);
}

TEST(Subsample, StratifiedKeepsEveryClass) {
  Corpus c = numbered_train_corpus(40, 1);
  c.labels.push_back("rare");
  c.documents[3].label = "rare";
  const auto r = subsample_and_split(c, 0.025, 0.0, 0, true);
  EXPECT_TRUE(r.empty_classes.empty());
  EXPECT_EQ(r.corpus.count(Split::train), 2u);
}

TEST(Subsample, RejectsBadArguments) {
  const auto c = numbered_train_corpus(10);
  EXPECT_THROW(subsample_and_split(c, 0.0, 0.1, 0), ConfigError);
  EXPECT_THROW(subsample_and_split(c, 0.5, 1.0, 0), ConfigError);
  Corpus empty;
  empty.labels = {"a"};
  EXPECT_THROW(subsample_and_split(empty, 0.5, 0.1, 0), Error);
}

TEST(Augment, MultiplierOneIsIdentity) {
  const auto c = numbered_train_corpus(5);
  const auto out = augment_test(c, 1, 3);
  ASSERT_EQ(out.documents.size(), c.documents.size());
  EXPECT_EQ(out.documents.back().tokens, c.documents.back().tokens);
}

TEST(Augment, FiveTimesTheTestSet) {
  Corpus c;
  c.labels = {"a"};
  c.documents.push_back({0, {"x", "y"}, "a", Split::train});
  for (std::size_t i = 0; i < 2189; ++i) c.documents.push_back({i + 1, {"x", "y", "z"}, "a", Split::test});
  const auto out = augment_test(c, 5, 0);
  EXPECT_EQ(out.count(Split::test), 10945u);
  EXPECT_EQ(out.count(Split::train), 1u);
}

TEST(Augment, SwapSemantics) {
  std::vector<std::string> t{"a", "b", "c"};
  swap_tokens(t, 0, 2);
  EXPECT_EQ(t, (std::vector<std::string>{"c", "b", "a"}));
  delete_token(t, 1);
  EXPECT_EQ(t, (std::vector<std::string>{"c", "a"}));
}

TEST(Augment, CopiesCarryExactlyOnePerturbation) {
  Corpus c;
  c.labels = {"a", "b"};
  c.documents.push_back({0, {"p", "q", "r", "s"}, "b", Split::test});
  c.documents.push_back({1, {"solo"}, "a", Split::test});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto out = augment_test(c, 6, seed);
    ASSERT_EQ(out.count(Split::test), 12u);
    std::set<std::size_t> ids;
    for (const auto &d : out.documents) ids.insert(d.id);
    EXPECT_EQ(ids.size(), out.documents.size());
    for (std::size_t i = 2; i < out.documents.size(); ++i) {
      const auto &d = out.documents[i];
      const auto &src = c.documents[i % 2];
      EXPECT_EQ(d.label, src.label);
      if (d.tokens.size() + 1 == src.tokens.size()) {
        continue; // deletion
      }
      ASSERT_EQ(d.tokens.size(), src.tokens.size());
      std::size_t diff = 0;
      for (std::size_t k = 0; k < d.tokens.size(); ++k) diff += d.tokens[k] != src.tokens[k];
      // A swap changes two positions; single-token swaps fall back to a copy.
      EXPECT_TRUE(diff == 2 || (src.tokens.size() == 1 && diff == 0));
      auto sorted_a = d.tokens, sorted_b = src.tokens;
      std::sort(sorted_a.begin(), sorted_a.end());
      std::sort(sorted_b.begin(), sorted_b.end());
      EXPECT_EQ(sorted_a, sorted_b);
    }
  }
}

TEST(Augment, RejectsZeroMultiplier) { EXPECT_THROW(augment_test(numbered_train_corpus(2), 0, 0), ConfigError); }
