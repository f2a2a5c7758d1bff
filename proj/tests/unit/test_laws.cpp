#include <gtest/gtest.h>

#include "markovcat/markovcat.hpp"
#include "support/generators.hpp"

using namespace markovcat;
using namespace markovcat::testing;

namespace {

template <class C>
void check_all_laws(Rng& rng, double tol, std::size_t max_size) {
  const Object x = random_object(rng, 2, max_size), y = random_object(rng, 1, max_size);
  for (const auto& r : comonoid_laws<C>(x, y)) EXPECT_LE(r.deviation, tol) << C::name << " " << r.law;
  const Object a{2}, b = random_object(rng, 2, max_size), c{3}, d{2};
  const auto f = random_morphism<C>(rng, a, b);
  for (const auto& r : composition_laws<C>(f, random_morphism<C>(rng, b, c), random_morphism<C>(rng, c, d)))
    EXPECT_LE(r.deviation, tol) << C::name << " " << r.law;
  const auto k = random_morphism<C>(rng, a, Object{2, 2, 2});
  EXPECT_LE(conditional_law<C>(k, OutputPartition{{2}, {0, 1}}).deviation, tol);
  EXPECT_LE(double_conditional_law<C>(k).deviation, tol);
  const auto by = random_morphism<C>(rng, b, Object{2, 3});
  EXPECT_LE(postcomposition_law<C>(by, random_morphism<C>(rng, Object{2}, Object{3})).deviation, tol);
  EXPECT_LE(deterministic_precomposition_law<C>(by, random_deterministic<C>(rng, a, b)).deviation, tol);
  EXPECT_LE(bayes_inverse_law<C>(random_morphism<C>(rng, x, y), random_morphism<C>(rng, Object::unit(), x)).deviation,
            tol);
}

}  // namespace

TEST(Laws, FinStoch) {
  Rng rng(61);
  for (int i = 0; i < 20; ++i) check_all_laws<FinStoch>(rng, 1e-12, 3);
}

TEST(Laws, FinSetMulti) {
  Rng rng(62);
  for (int i = 0; i < 20; ++i) check_all_laws<FinSetMulti>(rng, 0.0, 3);
}

TEST(Laws, Gauss) {
  Rng rng(63);
  for (int i = 0; i < 20; ++i) check_all_laws<Gauss>(rng, 1e-9, 2);
}

TEST(Laws, UniquenessDetectsDifferenceOnPositiveMass) {
  // a conditional changed where the conditioned output has positive mass is caught
  Rng rng(64);
  const auto k = random_stochastic(rng, Object::unit(), Object{2, 2}, 0.0);
  auto other = FinStoch::conditional(k, OutputPartition{{0}, {1}});
  other.at(0, 0) = 1.0 - other(0, 0);
  other.at(1, 0) = 1.0 - other(1, 0);
  const auto r = conditional_uniqueness<FinStoch>(k, other, OutputPartition{{0}, {1}});
  if (std::abs(k(0, 0) - k(2, 0)) > 1e-6) {
    EXPECT_GT(r.deviation, 1e-6);
  }
}

TEST(Laws, UniquenessIgnoresNullSets) {
  Rng rng(65);
  // the second observation value is impossible
  const auto k = finite::state_from<finite::ProbabilitySemiring>(Object{2, 2}, {0.3, 0.0, 0.7, 0.0});
  const OutputPartition part{{0}, {1}};
  const auto alt = alternative_conditional<FinStoch>(rng, k, part);
  EXPECT_LE(conditional_uniqueness<FinStoch>(k, alt, part).deviation, 1e-15);
}
