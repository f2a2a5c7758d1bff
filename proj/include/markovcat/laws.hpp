#pragma once

#include <string>
#include <vector>

#include "markovcat/core/category.hpp"

namespace markovcat {

/// One executable law with the deviation between its two sides.
struct LawResult {
  std::string law;
  double deviation = 0.0;
};

/// Coassociativity, cocommutativity, both counit laws, and compatibility of
/// copy with the tensor product on x ⊗ y.
template <MarkovCategory C>
std::vector<LawResult> comonoid_laws(const Object& x, const Object& y) {
  std::vector<LawResult> out;
  const auto id = C::identity(x);
  const auto cp = C::copy(x);
  out.push_back({"coassociativity", C::deviation(C::compose(cp, C::tensor(cp, id)),
                                                 C::compose(cp, C::tensor(id, cp)))});
  out.push_back({"cocommutativity", C::deviation(C::compose(cp, C::swap(x, x)), cp)});
  out.push_back({"counit-left", C::deviation(C::compose(cp, C::tensor(C::discard(x), id)), id)});
  out.push_back({"counit-right", C::deviation(C::compose(cp, C::tensor(id, C::discard(x))), id)});

  const std::size_t rx = x.rank(), ry = y.rank();
  std::vector<std::size_t> order = index_range(0, rx);
  for (auto i : index_range(2 * rx, 2 * rx + ry)) order.push_back(i);
  for (auto i : index_range(rx, 2 * rx)) order.push_back(i);
  for (auto i : index_range(2 * rx + ry, 2 * rx + 2 * ry)) order.push_back(i);
  const auto split = C::marginal(C::tensor(cp, C::copy(y)), order);
  out.push_back({"copy-tensor-compatibility", C::deviation(C::copy(x * y), split)});
  out.push_back({"discard-tensor-compatibility",
                 C::deviation(C::discard(x * y), C::tensor(C::discard(x), C::discard(y)))});
  return out;
}

/// Identity laws, naturality of discard, and associativity for a
/// composable triple f, g, h.
template <MarkovCategory C>
std::vector<LawResult> composition_laws(const MorphismOf<C>& f, const MorphismOf<C>& g, const MorphismOf<C>& h) {
  std::vector<LawResult> out;
  out.push_back({"identity-left", C::deviation(C::compose(C::identity(C::source(f)), f), f)});
  out.push_back({"identity-right", C::deviation(C::compose(f, C::identity(C::target(f))), f)});
  out.push_back({"discard-naturality", C::deviation(C::compose(f, C::discard(C::target(f))), C::discard(C::source(f)))});
  out.push_back({"associativity", C::deviation(C::compose(C::compose(f, g), h), C::compose(f, C::compose(g, h)))});
  out.push_back({"tensor-interchange",
                 C::deviation(C::compose(C::tensor(f, g), C::tensor(g, h)), C::tensor(C::compose(f, g), C::compose(g, h)))});
  return out;
}

/// Defining equation of the conditional w.r.t. part.conditioned.
template <MarkovCategory C>
LawResult conditional_law(const MorphismOf<C>& f, const OutputPartition& part) {
  return {"conditional-definition", conditional_defect<C>(f, C::conditional(f, part), part)};
}

/// Two conditionals of f are equal almost surely w.r.t. the conditioning
/// reference.
template <MarkovCategory C>
LawResult conditional_uniqueness(const MorphismOf<C>& f, const MorphismOf<C>& other, const OutputPartition& part) {
  return {"conditional-as-uniqueness",
          almost_sure_defect<C>(C::conditional(f, part), other, conditioning_reference<C>(f, part.conditioned))};
}

/// Conditioning f : A → X ⊗ Y ⊗ Z on Z and then on Y agrees with
/// conditioning on Z ⊗ Y at once (single-factor X, Y, Z).
template <MarkovCategory C>
LawResult double_conditional_law(const MorphismOf<C>& f) {
  if (C::target(f).rank() != 3) throw DomainError("double_conditional_law: expects three output factors");
  const auto on_z = C::conditional(f, OutputPartition{{0, 1}, {2}});
  const auto twice = C::conditional(on_z, OutputPartition{{0}, {1}});
  const auto at_once = C::conditional(f, OutputPartition{{0}, {2, 1}});
  const auto reference = conditioning_reference<C>(f, {2, 1});
  return {"double-conditional", almost_sure_defect<C>(twice, at_once, reference)};
}

/// For f : B → W ⊗ Y and g : W → X, the conditional on Y of (g ⊗ id)∘f is
/// g ∘ f_{|Y}.
template <MarkovCategory C>
LawResult postcomposition_law(const MorphismOf<C>& f, const MorphismOf<C>& g) {
  if (C::target(f).rank() != 2) throw DomainError("postcomposition_law: expects two output factors");
  const auto h = transform<C>(f, {0}, g);  // outputs Y, X
  const auto lhs = C::conditional(h, OutputPartition{index_range(1, C::target(h).rank()), {0}});
  const auto rhs = C::compose(C::conditional(f, OutputPartition{{0}, {1}}), g);
  return {"postcomposition-coherence", almost_sure_defect<C>(lhs, rhs, conditioning_reference<C>(h, {0}))};
}

/// For f : B → X ⊗ Y and deterministic g : D → B, conditioning f∘g on Y is
/// f_{|Y}∘(g ⊗ id).
template <MarkovCategory C>
LawResult deterministic_precomposition_law(const MorphismOf<C>& f, const MorphismOf<C>& g) {
  if (C::target(f).rank() != 2) throw DomainError("deterministic_precomposition_law: expects two output factors");
  const OutputPartition part{{0}, {1}};
  const auto fg = C::compose(g, f);
  const auto lhs = C::conditional(fg, part);
  const auto rhs = C::compose(C::tensor(g, C::identity(C::target(f).select(std::vector<std::size_t>{1}))),
                              C::conditional(f, part));
  return {"deterministic-precomposition", almost_sure_defect<C>(lhs, rhs, conditioning_reference<C>(fg, {1}))};
}

/// Bayesian inverse of f w.r.t. the state p reconstructs the joint.
template <MarkovCategory C>
LawResult bayes_inverse_law(const MorphismOf<C>& f, const MorphismOf<C>& p) {
  const std::size_t rx = C::target(p).rank();
  const auto joint = C::branch(p, index_range(0, rx), f);
  const OutputPartition part{index_range(0, rx), index_range(rx, C::target(joint).rank())};
  return {"bayes-inverse-definition", conditional_defect<C>(joint, bayes_inverse<C>(f, p), part)};
}

}  // namespace markovcat
