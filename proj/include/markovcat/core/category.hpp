#pragma once

#include <algorithm>
#include <concepts>
#include <span>
#include <vector>

#include "markovcat/core/errors.hpp"
#include "markovcat/core/object.hpp"

namespace markovcat {

// An instance category is a stateless traits type exposing its morphism type
// and structure maps as static functions. Composition is written in diagram
// order: compose(f, g) runs f first, i.e. it is g∘f.
//
// branch(f, idx, k) copies the outputs of f listed in idx, feeds them to k and
// appends k's outputs after f's. It equals (id ⊗ k)∘(id ⊗ copy)∘f up to a
// reshuffle, and is the workhorse for building joints without materializing
// identity kernels on large objects.
template <class C>
concept MarkovCategory = requires(const typename C::Morphism& f, const Object& x,
                                  std::span<const std::size_t> idx,
                                  const OutputPartition& part,
                                  const typename C::Point& pt) {
  typename C::Morphism;
  typename C::Point;
  { C::source(f) } -> std::convertible_to<Object>;
  { C::target(f) } -> std::convertible_to<Object>;
  { C::identity(x) } -> std::same_as<typename C::Morphism>;
  { C::copy(x) } -> std::same_as<typename C::Morphism>;
  { C::discard(x) } -> std::same_as<typename C::Morphism>;
  { C::swap(x, x) } -> std::same_as<typename C::Morphism>;
  { C::compose(f, f) } -> std::same_as<typename C::Morphism>;
  { C::tensor(f, f) } -> std::same_as<typename C::Morphism>;
  { C::marginal(f, idx) } -> std::same_as<typename C::Morphism>;
  { C::conditional(f, part) } -> std::same_as<typename C::Morphism>;
  { C::branch(f, idx, f) } -> std::same_as<typename C::Morphism>;
  { C::point(x, pt) } -> std::same_as<typename C::Morphism>;
  { C::weight(f, pt) } -> std::convertible_to<double>;
  { C::deviation(f, f) } -> std::convertible_to<double>;
  { C::normalize(f) } -> std::same_as<typename C::Morphism>;
  { C::default_tolerance() } -> std::convertible_to<double>;
  C::check_oracle_cap(x);
};

template <MarkovCategory C>
using MorphismOf = typename C::Morphism;

template <MarkovCategory C>
using PointOf = typename C::Point;

/// Instances where an observation of zero weight leaves the prediction
/// untouched instead of taking the conditional's fallback branch.
template <class C>
inline constexpr bool keeps_prediction_on_degenerate = false;

template <MarkovCategory C>
bool approx_equal(const MorphismOf<C>& f, const MorphismOf<C>& g, double tol) {
  return C::deviation(f, g) <= tol;
}

/// All output factors of f, in order.
template <MarkovCategory C>
std::vector<std::size_t> all_outputs(const MorphismOf<C>& f) {
  return index_range(0, C::target(f).rank());
}

/// The state A → A ⊗ Y pairing each input with a sample of f's Y-marginal.
/// Conditionals w.r.t. Y are unique almost surely w.r.t. this morphism.
template <MarkovCategory C>
MorphismOf<C> conditioning_reference(const MorphismOf<C>& f,
                                     const std::vector<std::size_t>& conditioned) {
  const Object a = C::source(f);
  return C::branch(C::identity(a), index_range(0, a.rank()),
                   C::marginal(f, conditioned));
}

/// Rebuilds f : A → T from a conditional c : A ⊗ Y → X and the Y-marginal
/// m : A → Y, placing the factors back in f's original output order.
template <MarkovCategory C>
MorphismOf<C> reconstruct(const MorphismOf<C>& c, const MorphismOf<C>& m,
                          const OutputPartition& part) {
  const Object a = C::source(m);
  const std::size_t ra = a.rank();
  const std::size_t ry = part.conditioned.size();
  auto with_y = C::branch(C::identity(a), index_range(0, ra), m);
  auto with_x = C::branch(with_y, index_range(0, ra + ry), c);

  const std::size_t rank = part.kept.size() + ry;
  std::vector<std::size_t> order(rank);
  for (std::size_t k = 0; k < part.kept.size(); ++k) order[part.kept[k]] = ra + ry + k;
  for (std::size_t k = 0; k < ry; ++k) order[part.conditioned[k]] = ra + k;
  return C::marginal(with_x, order);
}

/// How far c is from satisfying the defining equation of a conditional of f.
template <MarkovCategory C>
double conditional_defect(const MorphismOf<C>& f, const MorphismOf<C>& c,
                          const OutputPartition& part) {
  return C::deviation(f, reconstruct<C>(c, C::marginal(f, part.conditioned), part));
}

/// Parametric Bayesian inverse of f : X → Y with respect to g : A → X,
/// i.e. the conditional on Y of (id ⊗ f)∘copy∘g. Result has type A ⊗ Y → X.
/// When g is a state this is the ordinary Bayesian inverse Y → X.
template <MarkovCategory C>
MorphismOf<C> bayes_inverse(const MorphismOf<C>& f, const MorphismOf<C>& g) {
  if (C::source(f) != C::target(g))
    throw DomainError("bayes_inverse: source of f must equal target of g");
  const std::size_t rx = C::target(g).rank();
  const std::size_t ry = C::target(f).rank();
  auto joint = C::branch(g, index_range(0, rx), f);
  return C::conditional(joint, OutputPartition{index_range(0, rx), index_range(rx, rx + ry)});
}

/// Deviation between copy∘f and (f ⊗ f)∘copy.
template <MarkovCategory C>
double determinism_defect(const MorphismOf<C>& f) {
  auto lhs = C::compose(f, C::copy(C::target(f)));
  auto rhs = C::compose(C::copy(C::source(f)), C::tensor(f, f));
  return C::deviation(lhs, rhs);
}

template <MarkovCategory C>
bool is_deterministic(const MorphismOf<C>& f, double tol = C::default_tolerance()) {
  return determinism_defect<C>(f) <= tol;
}

/// Deviation between the two sides of the almost-sure equality f =_{p} g,
/// namely (id ⊗ f)∘copy∘p versus (id ⊗ g)∘copy∘p.
template <MarkovCategory C>
double almost_sure_defect(const MorphismOf<C>& f, const MorphismOf<C>& g,
                          const MorphismOf<C>& p) {
  if (C::source(f) != C::source(g) || C::target(f) != C::target(g))
    throw DomainError("almost_surely_equal: f and g must be parallel");
  if (C::target(p) != C::source(f))
    throw DomainError("almost_surely_equal: p must land in the source of f");
  const auto all = index_range(0, C::target(p).rank());
  return C::deviation(C::branch(p, all, f), C::branch(p, all, g));
}

template <MarkovCategory C>
bool almost_surely_equal(const MorphismOf<C>& f, const MorphismOf<C>& g,
                         const MorphismOf<C>& p, double tol = C::default_tolerance()) {
  return almost_sure_defect<C>(f, g, p) <= tol;
}

/// Plugs a deterministic point into a kernel whose whole input is Y.
template <MarkovCategory C>
MorphismOf<C> instantiate(const MorphismOf<C>& kernel, const typename C::Point& y) {
  return C::compose(C::point(C::source(kernel), y), kernel);
}

/// Applies k to the outputs `idx` of f, replacing them by k's outputs (which
/// are appended at the end).
template <MarkovCategory C>
MorphismOf<C> transform(const MorphismOf<C>& f, const std::vector<std::size_t>& idx,
                        const MorphismOf<C>& k) {
  auto b = C::branch(f, idx, k);
  const std::size_t rank = C::target(b).rank();
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < rank; ++i)
    if (std::find(idx.begin(), idx.end(), i) == idx.end()) keep.push_back(i);
  return C::marginal(b, keep);
}

}  // namespace markovcat
