#include <gtest/gtest.h>

#include "markovcat/markovcat.hpp"
#include "support/generators.hpp"

using namespace markovcat;
using namespace markovcat::testing;

namespace {

HmmSpec<FinSetMulti> nfa() {
  HmmSpec<FinSetMulti> hmm;
  const auto f = finsetmulti::validate({{1, 0}, {1, 1}});
  const auto g = finsetmulti::validate({{1, 1}, {0, 1}});
  hmm.chain.kernels = {finsetmulti::subset(2, {0}), f};
  hmm.observations = {g, g};
  return hmm;
}

}  // namespace

TEST(FilterChain, UpdateMapOnNfa) {
  const auto u1 = filterchain::update_map(nfa(), 1);
  // input is PX ⊗ Y; the subset {a} has index 0, observation 1
  const std::size_t col = finite::flatten(u1.source(), std::vector<std::size_t>{0, 1});
  EXPECT_EQ(u1.column(col), (std::vector<std::uint8_t>{0, 1}));
}

TEST(FilterChain, UpdateAtZeroIsFilter) {
  Rng rng(51);
  const auto hmm = random_hmm<FinSetMulti>(rng, 2, 3, 2);
  EXPECT_EQ(FinSetMulti::deviation(filterchain::update_map(hmm, 0), filter_recursive_kernel(hmm, 0)), 0.0);
}

TEST(FilterChain, InitialTransition) {
  Rng rng(52);
  const auto hmm = random_hmm<FinSetMulti>(rng, 1, 3, 2);
  const auto h0 = filterchain::filter_transition(hmm, 0);
  const auto expected = FinSetMulti::compose(FinSetMulti::compose(hmm.transition(0), hmm.observation(0)),
                                             finsetmulti::sharp(filterchain::update_map(hmm, 0)));
  EXPECT_EQ(FinSetMulti::deviation(h0, expected), 0.0);
}

TEST(FilterChain, PossibilisticTheoremHolds) {
  Rng rng(53);
  for (int i = 0; i < 10; ++i) {
    const auto hmm = random_hmm<FinSetMulti>(rng, uniform_int(rng, 0, 3), uniform_int(rng, 1, 4), uniform_int(rng, 1, 3));
    const auto r = filterchain::verify_filter_markov(hmm);
    EXPECT_TRUE(r.passed()) << r.theorem_deviation << " " << r.lambda_defect << " " << r.update_defect;
  }
}

TEST(FilterChain, ProbabilisticTheoremHolds) {
  Rng rng(54);
  for (int i = 0; i < 10; ++i) {
    const auto hmm = random_hmm<FinStoch>(rng, uniform_int(rng, 0, 3), uniform_int(rng, 1, 3), uniform_int(rng, 1, 3));
    const auto r = filterchain::verify_filter_markov(hmm);
    EXPECT_TRUE(r.passed()) << r.theorem_deviation << " " << r.lambda_defect << " " << r.update_defect;
    EXPECT_FALSE(r.close_atoms);
  }
}

TEST(FilterChain, DeterministicModelHasDeterministicTransitions) {
  HmmSpec<FinStoch> hmm;
  const auto shift = finstoch::validate({{0, 1}, {1, 0}});
  hmm.chain.kernels = {finstoch::distribution({1.0, 0.0}), shift, shift};
  hmm.observations.assign(3, FinStoch::identity(Object{2}));
  const auto atlas = filterchain::build_posterior_atlas(hmm);
  for (std::size_t t = 0; t <= 2; ++t) {
    EXPECT_EQ(atlas.atoms[t].size(), 1u);
    EXPECT_TRUE(is_deterministic<FinStoch>(filterchain::filter_transition(hmm, atlas, t)));
  }
}

TEST(FilterChain, TransitionWeightsGroupPrefixProbabilities) {
  Rng rng(55);
  const auto hmm = random_hmm<FinStoch>(rng, 1, 2, 2);
  const auto atlas = filterchain::build_posterior_atlas(hmm);
  const auto h0 = filterchain::filter_transition(hmm, atlas, 0);
  // h_0 weights are the probabilities of y_0 grouped by posterior atom
  const std::size_t y[] = {1};
  const auto py = FinStoch::marginal(hmm_joint(hmm.truncated(0)), y);
  std::vector<double> grouped(atlas.atoms[0].size(), 0.0);
  for (std::size_t y0 = 0; y0 < 2; ++y0) {
    if (py(y0, 0) == 0.0) continue;
    const auto run = filter_instantiated(hmm.truncated(0), std::vector<std::vector<std::size_t>>{{y0}});
    grouped[atlas.atom_of(0, run.posterior(0).vector())] += py(y0, 0);
  }
  for (std::size_t a = 0; a < grouped.size(); ++a) EXPECT_NEAR(h0(a, 0), grouped[a], 1e-15);
}

TEST(FilterChain, ObsJointDefectIsZero) {
  Rng rng(56);
  const auto hmm = random_hmm<FinStoch>(rng, 2, 2, 2);
  EXPECT_LE(filterchain::obs_joint_defect(hmm), 1e-14);
}

TEST(FilterChain, StateCap) {
  Rng rng(57);
  const auto hmm = random_hmm<FinSetMulti>(rng, 1, 9, 2);
  EXPECT_THROW(filterchain::verify_filter_markov(hmm), ResourceError);
}
