#include <gtest/gtest.h>

#include "markovcat/markovcat.hpp"
#include "support/generators.hpp"

using namespace markovcat;
using namespace markovcat::testing;

namespace {

using Obs = std::vector<std::vector<std::size_t>>;

HmmSpec<FinSetMulti> nfa() {
  HmmSpec<FinSetMulti> hmm;
  const auto f = finsetmulti::validate({{1, 0}, {1, 1}});  // a → {a,b}, b → {b}
  const auto g = finsetmulti::validate({{1, 1}, {0, 1}});  // a ↦ {0}, b ↦ {0,1}
  hmm.chain.kernels = {finsetmulti::subset(2, {0}), f, f};
  hmm.observations = {g, g, g};
  return hmm;
}

HmmSpec<Gauss> scalar_gauss(std::size_t n) {
  const gauss::Matrix one = gauss::Matrix::Ones(1, 1);
  const gauss::Vector zero = gauss::Vector::Zero(1);
  HmmSpec<Gauss> hmm;
  hmm.chain.kernels.push_back(gauss::GaussMap::state(zero, one));
  for (std::size_t t = 1; t <= n; ++t) hmm.chain.kernels.push_back(gauss::GaussMap::affine(one, zero, one));
  for (std::size_t t = 0; t <= n; ++t) hmm.observations.push_back(gauss::GaussMap::affine(one, zero, one));
  return hmm;
}

}  // namespace

TEST(Filter, PerfectObservationGivesPointMass) {
  HmmSpec<FinStoch> hmm;
  hmm.chain.kernels = {finstoch::distribution({0.2, 0.3, 0.5})};
  hmm.observations = {FinStoch::identity(Object{3})};
  const auto run = filter_instantiated(hmm, Obs{{2}});
  EXPECT_EQ(run.posterior(0).vector(), (std::vector<double>{0.0, 0.0, 1.0}));
}

TEST(Filter, MatchesBruteForceOverTrajectories) {
  Rng rng(31);
  const auto hmm = random_hmm<FinStoch>(rng, 2, 2, 2);
  const Obs obs{{0}, {1}, {1}};
  std::vector<double> post(2, 0.0);
  for (std::size_t x0 = 0; x0 < 2; ++x0)
    for (std::size_t x1 = 0; x1 < 2; ++x1)
      for (std::size_t x2 = 0; x2 < 2; ++x2)
        post[x2] += hmm.transition(0)(x0, 0) * hmm.observation(0)(0, x0) * hmm.transition(1)(x1, x0) *
                    hmm.observation(1)(1, x1) * hmm.transition(2)(x2, x1) * hmm.observation(2)(1, x2);
  const double mass = post[0] + post[1];
  ASSERT_GT(mass, 0.0);
  const auto run = filter_instantiated(hmm, obs);
  EXPECT_NEAR(run.posterior(2)(0, 0), post[0] / mass, 1e-14);
  EXPECT_FALSE(run.any_degenerate());
  const auto batch = filter_batch(hmm, 2, obs);
  EXPECT_LE(FinStoch::deviation(batch.state, run.posterior(2)), 1e-14);
}

TEST(Filter, ImpossibleObservationFallsBackAndFlags) {
  HmmSpec<FinStoch> hmm;
  hmm.chain.kernels = {finstoch::distribution({1.0, 0.0})};
  hmm.observations = {FinStoch::identity(Object{2})};
  const auto run = filter_instantiated(hmm, Obs{{1}});
  EXPECT_TRUE(run.steps[0].degenerate);
  EXPECT_EQ(run.steps[0].weight, 0.0);
  EXPECT_EQ(run.posterior(0).vector(), (std::vector<double>{0.5, 0.5}));
}

TEST(Filter, RecursiveKernelAtZeroIsBayesInverse) {
  Rng rng(32);
  const auto hmm = random_hmm<FinStoch>(rng, 1, 3, 2);
  const auto b0 = filter_recursive_kernel(hmm, 0);
  EXPECT_EQ(FinStoch::deviation(b0, bayes_inverse<FinStoch>(hmm.observation(0), hmm.transition(0))), 0.0);
}

TEST(Filter, RecursiveAgreesWithBatchAlmostSurely) {
  Rng rng(33);
  for (int i = 0; i < 5; ++i) {
    const auto hmm = random_hmm<FinStoch>(rng, 3, 3, 2);
    for (std::size_t t = 0; t <= 3; ++t) {
      const auto ys = filterchain::observation_process(hmm, t);
      EXPECT_LE(almost_sure_defect<FinStoch>(filter_recursive_kernel(hmm, t), filter_batch_kernel(hmm, t), ys), 1e-14);
    }
  }
}

TEST(Filter, UninformativeObservationsGiveChainMarginal) {
  Rng rng(34);
  auto hmm = random_hmm<FinStoch>(rng, 2, 3, 2);
  const auto constant = random_stochastic(rng, Object::unit(), Object{2}, 0.0);
  for (auto& g : hmm.observations) g = FinStoch::compose(FinStoch::discard(Object{3}), constant);
  const auto run = filter_instantiated(hmm, Obs{{0}, {1}, {0}});
  const auto marginal = FinStoch::compose(FinStoch::compose(hmm.transition(0), hmm.transition(1)), hmm.transition(2));
  EXPECT_LE(FinStoch::deviation(run.posterior(2), marginal), 1e-14);
}

TEST(Filter, DeterministicChainWithPerfectObservations) {
  HmmSpec<FinStoch> hmm;
  const auto shift = finstoch::validate({{0, 0, 1}, {1, 0, 0}, {0, 1, 0}});
  hmm.chain.kernels = {finstoch::distribution({0.0, 1.0, 0.0}), shift, shift};
  hmm.observations.assign(3, FinStoch::identity(Object{3}));
  const auto run = filter_instantiated(hmm, Obs{{1}, {2}, {0}});
  EXPECT_EQ(run.posterior(2).vector(), (std::vector<double>{1.0, 0.0, 0.0}));
}

TEST(Filter, PossibilisticSubsetConstruction) {
  const auto run = filter_instantiated(nfa(), Obs{{0}, {1}, {0}});
  EXPECT_EQ(finsetmulti::members(run.posterior(0)), (std::vector<std::size_t>{0}));
  EXPECT_EQ(finsetmulti::members(run.posterior(1)), (std::vector<std::size_t>{1}));
  EXPECT_EQ(finsetmulti::members(run.posterior(2)), (std::vector<std::size_t>{1}));
}

TEST(Filter, PossibilisticMatchesPathEnumeration) {
  Rng rng(35);
  for (int i = 0; i < 10; ++i) {
    const auto hmm = random_hmm<FinSetMulti>(rng, 3, 4, 2);
    for (const auto& seq : all_sequences(3, 2)) {
      std::vector<std::size_t> ys;
      for (const auto& y : seq) ys.push_back(y[0]);
      const auto oracle = path_posteriors(hmm, ys);
      const auto run = filter_instantiated(hmm, seq);
      for (std::size_t t = 0; t <= 3 && !oracle[t].empty(); ++t) {
        const auto got = finsetmulti::members(run.posterior(t));
        EXPECT_EQ(std::set<std::size_t>(got.begin(), got.end()), oracle[t]);
      }
    }
  }
}

TEST(Filter, PredictiveObservation) {
  // point posterior through deterministic f and g gives a point
  const auto point = FinStoch::point(Object{3}, {1});
  const auto shift = finstoch::validate({{0, 0, 1}, {1, 0, 0}, {0, 1, 0}});
  const auto obs = finstoch::validate({{1, 0, 1}, {0, 1, 0}});
  EXPECT_EQ(predictive_observation<FinStoch>(point, shift, obs).vector(), (std::vector<double>{1.0, 0.0}));
}

TEST(Kalman, ScalarHandValues) {
  const auto hmm = scalar_gauss(1);
  const std::vector<gauss::Vector> ys(2, gauss::Vector::Ones(1));
  const auto k = kalman_closed_form(hmm, ys);
  EXPECT_NEAR(k[0].mean(0), 0.5, 1e-15);
  EXPECT_NEAR(k[0].cov(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(k[0].innovation_cov(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(k[1].predicted_mean(0), 0.5, 1e-15);
  EXPECT_NEAR(k[1].predicted_cov(0, 0), 1.5, 1e-15);
  EXPECT_NEAR(k[1].innovation_cov(0, 0), 2.5, 1e-15);
  EXPECT_NEAR(k[1].gain(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(k[1].mean(0), 0.8, 1e-15);
  EXPECT_NEAR(k[1].cov(0, 0), 0.6, 1e-15);

  const auto run = filter_instantiated(hmm, ys);
  EXPECT_NEAR(run.posterior(1).mean()(0), 0.8, 1e-15);
  EXPECT_NEAR(run.posterior(1).cov()(0, 0), 0.6, 1e-15);
}

TEST(Kalman, GenericFilterMatchesClosedForm) {
  Rng rng(36);
  for (int i = 0; i < 5; ++i) {
    const auto hmm = random_linear_gaussian(rng, 20, 3, 2);
    const auto ys = simulate(hmm, 20, rng).observations;
    const auto run = filter_instantiated(hmm, ys);
    const auto k = kalman_closed_form(hmm, ys);
    for (std::size_t t = 0; t <= 20; ++t)
      EXPECT_LE(Gauss::deviation(run.posterior(t), gauss::GaussMap::state(k[t].mean, k[t].cov)), 1e-9);
  }
}

TEST(Kalman, BatchGaussianConditioningAgrees) {
  Rng rng(37);
  const auto hmm = random_linear_gaussian(rng, 3, 2, 1);
  const auto ys = simulate(hmm, 3, rng).observations;
  const auto run = filter_instantiated(hmm, ys);
  for (std::size_t t = 0; t <= 3; ++t)
    EXPECT_LE(Gauss::deviation(filter_batch(hmm, t, ys).state, run.posterior(t)), 1e-9);
}

TEST(Filter, RejectsMalformedObservations) {
  Rng rng(38);
  const auto hmm = random_hmm<FinStoch>(rng, 1, 2, 2);
  EXPECT_THROW(filter_instantiated(hmm, Obs{{0}, {5}}), DomainError);
  EXPECT_THROW(filter_instantiated(hmm, Obs{{0}, {1}, {0}}), DomainError);
}
