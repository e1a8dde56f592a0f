#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace inductgcn;
using namespace testing_support;

namespace {

double loss_at(const ToyProblem &t, const ModelParams &p) {
  return cross_entropy(forward(t.adj, t.features, p).probs, t.labels, t.mask).loss;
}

void check_finite_differences(ModelParams p, const ToyProblem &t) {
  const auto analytic = loss_and_grads(t.adj, t.features, p, t.labels, t.mask).grads;
  const double h = 1e-6;
  const auto check_block = [&](DenseMatrix &w, const DenseMatrix &g) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double orig = w.values()[i];
      w.values()[i] = orig + h;
      const double up = loss_at(t, p);
      w.values()[i] = orig - h;
      const double down = loss_at(t, p);
      w.values()[i] = orig;
      const double numeric = (up - down) / (2 * h);
      EXPECT_NEAR(g.values()[i], numeric, 1e-6 + 1e-4 * std::abs(numeric)) << "entry " << i;
    }
  };
  check_block(p.w0, analytic.w0);
  if (p.kind == ModelKind::gcn) {
    check_block(p.w1, analytic.w1);
  }
}

TrainConfig quick_config(ModelKind kind = ModelKind::gcn) {
  TrainConfig c;
  c.kind = kind;
  c.hidden = 16;
  c.max_epochs = 40;
  c.patience = 10;
  return c;
}

} // namespace

TEST(Forward, ZeroWeightsGiveUniformRows) {
  const auto t = toy_problem(1);
  ModelParams p;
  p.w0 = DenseMatrix(5, 4);
  p.w1 = DenseMatrix(4, 3);
  const auto f = forward(t.adj, t.features, p);
  for (double v : f.probs.values()) {
    EXPECT_NEAR(v, 1.0 / 3, 1e-15);
  }
}

TEST(Forward, MatchesDenseOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto t = toy_problem(seed);
    const auto gcn = init_params(ModelKind::gcn, 5, 7, 3, seed);
    const auto want = dense_gcn(t.adj.to_dense(), t.features.to_dense(), gcn.w0, gcn.w1);
    const auto got = forward(t.adj, t.features, gcn).probs;
    for (std::size_t i = 0; i < want.size(); ++i) {
      EXPECT_NEAR(got.values()[i], want.values()[i], 1e-10);
    }
    const auto sgc = init_params(ModelKind::sgc, 5, 0, 3, seed);
    const auto want_sgc = dense_sgc(t.adj.to_dense(), t.features.to_dense(), sgc.w0);
    const auto got_sgc = forward(t.adj, t.features, sgc).probs;
    for (std::size_t i = 0; i < want_sgc.size(); ++i) {
      EXPECT_NEAR(got_sgc.values()[i], want_sgc.values()[i], 1e-10);
    }
  }
}

TEST(Forward, RejectsInconsistentShapes) {
  const auto t = toy_problem(2);
  const auto p = init_params(ModelKind::gcn, 6, 4, 3, 0);
  EXPECT_THROW(forward(t.adj, t.features, p), Error);
}

TEST(Loss, UniformTwoClassIsLnTwo) {
  DenseMatrix probs(2, 2);
  probs.fill(0.5);
  const std::vector<int> labels{0, 1};
  const std::vector<std::size_t> nodes{0, 1};
  EXPECT_NEAR(cross_entropy(probs, labels, nodes).loss, std::log(2.0), 1e-15);
}

TEST(Loss, ClampsZeroProbability) {
  DenseMatrix probs(1, 2);
  probs(0, 1) = 1.0;
  const std::vector<int> labels{0};
  const std::vector<std::size_t> nodes{0};
  const auto ce = cross_entropy(probs, labels, nodes);
  EXPECT_EQ(ce.clamped, 1u);
  EXPECT_NEAR(ce.loss, -std::log(kProbabilityFloor), 1e-9);
}

TEST(Loss, OnlyMaskedNodesContribute) {
  DenseMatrix probs(3, 2);
  probs.fill(0.5);
  probs(2, 0) = 1e-3;
  probs(2, 1) = 1 - 1e-3;
  const std::vector<int> labels{0, 1, 0};
  const std::vector<std::size_t> nodes{0, 1};
  EXPECT_NEAR(cross_entropy(probs, labels, nodes).loss, std::log(2.0), 1e-15);
}

TEST(Gradients, MatchFiniteDifferencesGcn) {
  for (std::uint64_t seed : {3, 4, 5}) {
    check_finite_differences(init_params(ModelKind::gcn, 5, 6, 3, seed), toy_problem(seed));
  }
}

TEST(Gradients, MatchFiniteDifferencesSgc) {
  for (std::uint64_t seed : {3, 4, 5}) {
    check_finite_differences(init_params(ModelKind::sgc, 5, 0, 3, seed), toy_problem(seed));
  }
}

TEST(Gradients, WeightDecayAddsToW0Only) {
  const auto t = toy_problem(6);
  const auto p = init_params(ModelKind::gcn, 5, 4, 3, 6);
  const auto plain = loss_and_grads(t.adj, t.features, p, t.labels, t.mask);
  const auto decayed = loss_and_grads(t.adj, t.features, p, t.labels, t.mask, 0.1);
  for (std::size_t i = 0; i < p.w0.size(); ++i) {
    EXPECT_NEAR(decayed.grads.w0.values()[i] - plain.grads.w0.values()[i], 0.1 * p.w0.values()[i], 1e-15);
  }
  EXPECT_EQ(decayed.grads.w1, plain.grads.w1);
}

TEST(Gradients, ZeroFirstLayerGivesZeroSecondLayerGradient) {
  const auto t = toy_problem(7);
  auto p = init_params(ModelKind::gcn, 5, 4, 3, 7);
  p.w0.fill(0.0);
  const auto g = loss_and_grads(t.adj, t.features, p, t.labels, t.mask).grads;
  for (double v : g.w1.values()) {
    EXPECT_EQ(v, 0.0);
  }
}

TEST(Adam, FirstStepMovesByLearningRate) {
  std::vector<double> param{0.0}, m{0.0}, v{0.0};
  const std::vector<double> grad{1.0};
  adam_update(param, grad, m, v, 1, 0.02, 0.9, 0.999, 1e-8);
  EXPECT_NEAR(param[0], -0.0199999998, 1e-12);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  std::vector<double> param{0.3, -1.2}, m{0.0, 0.0}, v{0.0, 0.0};
  const std::vector<double> grad{0.0, 0.0};
  for (std::uint64_t t = 1; t <= 5; ++t) {
    adam_update(param, grad, m, v, t, 0.02, 0.9, 0.999, 1e-8);
  }
  EXPECT_EQ(param, (std::vector<double>{0.3, -1.2}));
}

TEST(Adam, ConstantGradientMovesMonotonically) {
  std::vector<double> param{1.0}, m{0.0}, v{0.0};
  const std::vector<double> grad{0.5};
  double prev = param[0];
  for (std::uint64_t t = 1; t <= 20; ++t) {
    adam_update(param, grad, m, v, t, 0.02, 0.9, 0.999, 1e-8);
    EXPECT_LT(param[0], prev);
    prev = param[0];
  }
}

TEST(EarlyStopping, StopsAfterPatienceWithoutImprovement) {
  EarlyStopper s(10);
  EXPECT_FALSE(s.observe(1.0));
  EXPECT_FALSE(s.observe(0.9));
  std::size_t epoch = 2;
  while (!s.observe(0.9)) {
    ++epoch;
    ASSERT_LT(epoch, 100u);
  }
  EXPECT_EQ(s.epochs(), 12u);
  EXPECT_EQ(s.best_epoch(), 2u);
  EXPECT_EQ(s.best_loss(), 0.9);
}

TEST(EarlyStopping, StrictlyImprovingNeverStops) {
  EarlyStopper s(3);
  for (int i = 0; i < 200; ++i) {
    EXPECT_FALSE(s.observe(10.0 - 0.01 * i));
  }
  EXPECT_EQ(s.best_epoch(), 200u);
}

TEST(EarlyStopping, ZeroPatienceDisablesStopping) {
  EarlyStopper s(0);
  for (int i = 0; i < 50; ++i) {
    EXPECT_FALSE(s.observe(1.0));
  }
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.patience = 200;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.dropout = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.learning_rate = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Params, CountForEightClassSetup) {
  const auto p = init_params(ModelKind::gcn, 1878, 200, 8, 0);
  EXPECT_EQ(p.parameter_count(), 377200u);
  const auto s = init_params(ModelKind::sgc, 1878, 200, 8, 0);
  EXPECT_EQ(s.parameter_count(), 1878u * 8u);
}

TEST(Params, GlorotBoundsAndDeterminism) {
  const auto a = init_params(ModelKind::gcn, 30, 10, 4, 11);
  const auto b = init_params(ModelKind::gcn, 30, 10, 4, 11);
  EXPECT_EQ(a, b);
  const double bound = std::sqrt(6.0 / 40.0);
  for (double v : a.w0.values()) {
    EXPECT_LE(std::abs(v), bound);
  }
  EXPECT_NE(a, init_params(ModelKind::gcn, 30, 10, 4, 12));
}

TEST(Fit, SmallLearningRateDecreasesTrainingLoss) {
  const auto p = build_pipeline(small_synthetic(30, 0), 1, 5);
  const auto targets = training_targets(p.graph);
  auto config = quick_config();
  config.learning_rate = 0.001;
  config.max_epochs = 2;
  config.patience = 0;
  const auto r = fit(p.graph.adjacency_norm, p.graph.features, targets.labels, targets.train_nodes, {}, 2, config);
  ASSERT_EQ(r.train_loss.size(), 2u);
  EXPECT_LT(r.train_loss[1], r.train_loss[0]);
}

TEST(Fit, DeterministicForSeed) {
  const auto p = build_pipeline(small_synthetic(30, 0), 1, 5);
  FitResult a_details, b_details;
  const auto a = train(p.graph, p.corpus, p.vocab, p.dfreq, quick_config(), &a_details);
  const auto b = train(p.graph, p.corpus, p.vocab, p.dfreq, quick_config(), &b_details);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a_details.train_loss, b_details.train_loss);
}

TEST(Fit, RestoresBestValidationEpoch) {
  auto raw = small_synthetic(40, 0);
  const auto split = subsample_and_split(raw, 1.0, 0.25, 0);
  const auto p = build_pipeline(split.corpus, 1, 5);
  FitResult details;
  auto config = quick_config();
  config.max_epochs = 60;
  config.patience = 5;
  config.learning_rate = 0.2;
  train(p.graph, p.corpus, p.vocab, p.dfreq, config, &details);
  ASSERT_TRUE(details.early_stopping);
  ASSERT_GE(details.best_epoch, 1u);
  const double best = *std::min_element(details.val_loss.begin(), details.val_loss.end());
  EXPECT_EQ(details.val_loss[details.best_epoch - 1], best);
  const auto targets = training_targets(p.graph);
  EXPECT_EQ(cross_entropy(details.final_pass.probs, targets.labels, targets.val_nodes).loss, best);
}

TEST(Fit, WithoutValidationRunsEveryEpoch) {
  const auto p = build_pipeline(small_synthetic(20, 0), 1, 5);
  FitResult details;
  auto config = quick_config();
  config.max_epochs = 15;
  const auto m = train(p.graph, p.corpus, p.vocab, p.dfreq, config, &details);
  EXPECT_FALSE(details.early_stopping);
  EXPECT_EQ(m.epochs_run, 15u);
}

TEST(Fit, DropoutTrainingStaysFinite) {
  const auto p = build_pipeline(small_synthetic(20, 0), 1, 5);
  auto config = quick_config();
  config.dropout = 0.5;
  config.weight_decay = 5e-4;
  FitResult details;
  train(p.graph, p.corpus, p.vocab, p.dfreq, config, &details);
  for (double l : details.train_loss) {
    EXPECT_TRUE(std::isfinite(l));
  }
}

TEST(Train, CachedWordRepresentationsAreNonNegative) {
  const auto p = build_pipeline(small_synthetic(20, 0), 1, 5);
  const auto m = train(p.graph, p.corpus, p.vocab, p.dfreq, quick_config());
  EXPECT_EQ(m.h1_word.rows(), p.vocab.size());
  EXPECT_EQ(m.h1_word.cols(), 16u);
  for (double v : m.h1_word.values()) {
    EXPECT_GE(v, 0.0);
  }
  EXPECT_EQ(m.word_degrees.size(), p.vocab.size());
}
