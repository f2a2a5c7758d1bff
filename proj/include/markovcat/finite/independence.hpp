#pragma once

#include <cmath>
#include <vector>

#include "markovcat/finite/kernel.hpp"

namespace markovcat::finite {

/// Largest violation of p(x,y,z)·p(y) = p(x,y)·p(y,z) over all outcomes, where
/// x, y, z range over the joint values of the factor groups xs, ys, zs of the
/// state p. Factors outside the three groups are marginalized out first.
/// In the boolean semiring the products are conjunctions and the result is 0
/// or 1.
template <class S>
double ci_defect(const Kernel<S>& p, const std::vector<std::size_t>& xs,
                 const std::vector<std::size_t>& ys, const std::vector<std::size_t>& zs) {
  if (!p.source().is_unit()) throw DomainError("ci_holds: expects a state");
  std::vector<std::size_t> order = xs;
  order.insert(order.end(), ys.begin(), ys.end());
  order.insert(order.end(), zs.begin(), zs.end());
  check_distinct(order, p.target().rank());

  // Marginalize onto (X, Y, Z) and read it as a 3-d table.
  const std::size_t nx = p.target().select(xs).cardinality();
  const std::size_t ny = p.target().select(ys).cardinality();
  const std::size_t nz = p.target().select(zs).cardinality();
  std::vector<typename S::value_type> t(nx * ny * nz, S::zero());
  const auto proj = projection_map(p.target(), order);
  for (std::size_t r = 0; r < p.rows(); ++r) {
    const auto w = p(r, 0);
    if (!S::is_zero(w)) t[proj[r]] = S::add(t[proj[r]], w);
  }
  auto at = [&](std::size_t x, std::size_t y, std::size_t z) { return t[(x * ny + y) * nz + z]; };

  std::vector<typename S::value_type> pxy(nx * ny, S::zero()), pyz(ny * nz, S::zero()),
      py(ny, S::zero());
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y)
      for (std::size_t z = 0; z < nz; ++z) {
        const auto w = at(x, y, z);
        pxy[x * ny + y] = S::add(pxy[x * ny + y], w);
        pyz[y * nz + z] = S::add(pyz[y * nz + z], w);
        py[y] = S::add(py[y], w);
      }

  double worst = 0.0;
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y)
      for (std::size_t z = 0; z < nz; ++z) {
        const double lhs = static_cast<double>(S::mul(at(x, y, z), py[y]));
        const double rhs = static_cast<double>(S::mul(pxy[x * ny + y], pyz[y * nz + z]));
        worst = std::max(worst, std::abs(lhs - rhs));
      }
  return worst;
}

/// Whether a state on X ⊗ Y ⊗ Z (three factors) displays X ⊥ Z | Y.
template <class S>
bool ci_holds(const Kernel<S>& p, double tol) {
  if (p.target().rank() != 3) throw DomainError("ci_holds: expects a state on three factors");
  return ci_defect(p, {0}, {1}, {2}) <= tol;
}

}  // namespace markovcat::finite
