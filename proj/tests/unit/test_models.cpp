#include <gtest/gtest.h>

#include "markovcat/markovcat.hpp"
#include "support/generators.hpp"

using namespace markovcat;
using namespace markovcat::testing;

TEST(ChainJoint, HorizonZeroIsInitialState) {
  ChainSpec<FinStoch> chain{{finstoch::distribution({0.25, 0.75})}};
  EXPECT_EQ(FinStoch::deviation(chain_joint(chain), chain.kernels[0]), 0.0);
}

TEST(ChainJoint, HandProduct) {
  ChainSpec<FinStoch> chain{{finstoch::distribution({1.0, 0.0}), finstoch::validate({{0.5, 0.3}, {0.5, 0.7}})}};
  const auto j = chain_joint(chain);
  EXPECT_EQ(j.vector(), (std::vector<double>{0.5, 0.5, 0.0, 0.0}));
}

TEST(ChainJoint, PossibleTrajectories) {
  // a → {a, b}, b → {b}, start {a}: trajectories aa, ab
  ChainSpec<FinSetMulti> chain{{finsetmulti::subset(2, {0}), finsetmulti::validate({{1, 0}, {1, 1}})}};
  const auto j = chain_joint(chain);
  EXPECT_EQ(j.vector(), (std::vector<std::uint8_t>{1, 1, 0, 0}));
}

TEST(HmmJoint, IdentityObservationsAreDiagonal) {
  HmmSpec<FinStoch> hmm;
  hmm.chain.kernels = {finstoch::distribution({0.4, 0.6})};
  hmm.observations = {FinStoch::identity(Object{2})};
  const auto j = hmm_joint(hmm);
  EXPECT_EQ(j.vector(), (std::vector<double>{0.4, 0.0, 0.0, 0.6}));
}

TEST(HmmJoint, MatchesTermByTermProduct) {
  Rng rng(17);
  const auto hmm = random_hmm<FinStoch>(rng, 1, 2, 2);
  const auto j = hmm_joint(hmm);
  for (std::size_t x0 = 0; x0 < 2; ++x0)
    for (std::size_t y0 = 0; y0 < 2; ++y0)
      for (std::size_t x1 = 0; x1 < 2; ++x1)
        for (std::size_t y1 = 0; y1 < 2; ++y1) {
          const double p = hmm.transition(0)(x0, 0) * hmm.observation(0)(y0, x0) * hmm.transition(1)(x1, x0) *
                           hmm.observation(1)(y1, x1);
          const std::size_t idx[] = {x0, y0, x1, y1};
          EXPECT_NEAR(j(finite::flatten(j.target(), idx), 0), p, 1e-16);
        }
}

TEST(HmmJoint, GaussianJointIsPsd) {
  Rng rng(4);
  const auto hmm = random_linear_gaussian(rng, 3, 2, 1);
  const auto j = hmm_joint(hmm);
  EXPECT_EQ(j.target().dimension(), 12u);
  Eigen::SelfAdjointEigenSolver<gauss::Matrix> eig(j.cov());
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10);
}

TEST(HmmJoint, ExtractRoundTrip) {
  Rng rng(8);
  const auto hmm = random_hmm<FinStoch>(rng, 2, 3, 2);
  const auto j = hmm_joint(hmm);
  EXPECT_LE(FinStoch::deviation(hmm_joint(extract_hmm<FinStoch>(j)), j), 1e-15);
  const auto c = chain_joint(hmm.chain);
  EXPECT_LE(FinStoch::deviation(chain_joint(extract_chain<FinStoch>(c)), c), 1e-15);
}

TEST(MarkovProperties, GeneratedJointsPass) {
  Rng rng(21);
  for (int i = 0; i < 10; ++i) {
    const auto hmm = random_hmm<FinStoch>(rng, 3, 2, 2);
    for (auto p : {MarkovProperty::HmmBackward, MarkovProperty::HmmLocal, MarkovProperty::HmmGlobal})
      EXPECT_TRUE(check_markov_properties(hmm_joint(hmm), p).all_passed()) << to_string(p);
    for (auto p : {MarkovProperty::ChainLocal, MarkovProperty::ChainGlobal})
      EXPECT_TRUE(check_markov_properties(chain_joint(hmm.chain), p).all_passed()) << to_string(p);
  }
}

TEST(MarkovProperties, PerturbedJointFails) {
  Rng rng(22);
  // dense kernels, so no slice of the joint is degenerate
  ChainSpec<FinStoch> chain;
  chain.kernels.push_back(random_stochastic(rng, Object::unit(), Object{2}, 0.0));
  for (int t = 0; t < 2; ++t) chain.kernels.push_back(random_stochastic(rng, Object{2}, Object{2}, 0.0));
  auto j = chain_joint(chain);
  // shift one entry and renormalize
  j.at(0, 0) += 0.2;
  j = FinStoch::normalize(j);
  EXPECT_FALSE(check_markov_properties(j, MarkovProperty::ChainLocal).all_passed() &&
               check_markov_properties(j, MarkovProperty::ChainGlobal).all_passed());
}

TEST(MarkovProperties, StatementCountsAndSampling) {
  bool exhaustive = false;
  const auto local = markov_statements(MarkovProperty::ChainLocal, 3, {}, &exhaustive);
  EXPECT_TRUE(exhaustive);
  EXPECT_FALSE(local.empty());
  markov_statements(MarkovProperty::HmmGlobal, 4, {}, &exhaustive);
  EXPECT_FALSE(exhaustive);
}

TEST(MarkovProperties, LayoutMismatchThrows) {
  const auto j = finite::state_from<finite::ProbabilitySemiring>(Object{2, 2, 2}, std::vector<double>(8, 0.125));
  EXPECT_THROW(check_markov_properties(j, MarkovProperty::HmmLocal), DomainError);
}

TEST(ConditionJoint, NothingGivenIsMarginal) {
  const auto j = finite::state_from<finite::ProbabilitySemiring>(Object{2, 2}, {0.1, 0.2, 0.3, 0.4});
  const auto c = condition_joint<FinStoch>(j, {0}, {}, {});
  EXPECT_NEAR(c.state(0, 0), 0.3, 1e-15);
  EXPECT_FALSE(c.degenerate);
}

TEST(ConditionJoint, HandBayes) {
  // x ~ (0.5, 0.5), y | x by [[0.9,0.2],[0.1,0.8]]; observe y = 0
  HmmSpec<FinStoch> hmm;
  hmm.chain.kernels = {finstoch::distribution({0.5, 0.5})};
  hmm.observations = {finstoch::validate({{0.9, 0.2}, {0.1, 0.8}})};
  const auto c = condition_joint<FinStoch>(hmm_joint(hmm), {0}, {1}, {0});
  EXPECT_NEAR(c.state(0, 0), 0.9 / 1.1, 1e-15);
  EXPECT_NEAR(c.weight, 0.55, 1e-15);
}

TEST(ReverseChain, HandExample) {
  const auto f = finstoch::validate({{0.9, 0.2}, {0.1, 0.8}});
  const auto f0 = finstoch::distribution({2.0 / 3.0, 1.0 / 3.0});
  const auto rev = reverse_chain<FinStoch>(f, f0);
  EXPECT_LE(FinStoch::deviation(FinStoch::compose(f0, rev), f0), 1e-15);
  // a two-state chain is reversible w.r.t. its stationary law
  EXPECT_LE(FinStoch::deviation(rev, f), 1e-15);
}

TEST(ReverseChain, PermutationReversesToInverse) {
  const auto cycle = finstoch::validate({{0, 0, 1}, {1, 0, 0}, {0, 1, 0}});
  const auto uniform = finstoch::distribution({1.0 / 3, 1.0 / 3, 1.0 / 3});
  const auto rev = reverse_chain<FinStoch>(cycle, uniform, 1e-15);
  EXPECT_LE(FinStoch::deviation(FinStoch::compose(cycle, rev), FinStoch::identity(Object{3})), 1e-15);
}

TEST(ReverseChain, SymmetricWithUniform) {
  const auto f = finstoch::validate({{0.6, 0.4}, {0.4, 0.6}});
  const auto rev = reverse_chain<FinStoch>(f, finstoch::distribution({0.5, 0.5}));
  EXPECT_LE(FinStoch::deviation(rev, f), 1e-15);
}

TEST(ReverseChain, RejectsNonStationary) {
  const auto f = finstoch::validate({{0.9, 0.2}, {0.1, 0.8}});
  EXPECT_THROW(reverse_chain<FinStoch>(f, finstoch::distribution({0.5, 0.5})), DomainError);
}
