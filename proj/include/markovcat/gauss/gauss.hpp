#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "markovcat/core/category.hpp"

namespace markovcat {
namespace gauss {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative cutoff for singular values in pseudoinverses.
inline constexpr double kRankTolerance = 1e-10;
/// Negative eigenvalues above -kPsdSlack·scale are treated as round-off.
inline constexpr double kPsdSlack = 1e-10;

/// Moore–Penrose pseudoinverse via SVD. Singular values below
/// tolerance·σ_max are treated as zero.
struct Pseudoinverse {
  Matrix input;
  double tolerance = kRankTolerance;
  Matrix result;
  Eigen::Index rank = 0;

  Pseudoinverse(const Matrix& m, double tol = kRankTolerance) : input(m), tolerance(tol) {
    result = Matrix::Zero(m.cols(), m.rows());
    if (m.size() == 0) return;
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sigma = svd.singularValues();
    const double cutoff = tol * (sigma.size() ? sigma(0) : 0.0);
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
      if (sigma(i) > cutoff && sigma(i) > 0.0) {
        result += svd.matrixV().col(i) * (1.0 / sigma(i)) * svd.matrixU().col(i).transpose();
        ++rank;
      }
    }
  }
};

inline Matrix pinv(const Matrix& m, double tol = kRankTolerance) { return Pseudoinverse(m, tol).result; }

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline Matrix symmetric_part(const Matrix& c) { return 0.5 * (c + c.transpose()); }

/// Projects onto the PSD cone. For results that are PSD in exact arithmetic,
/// such as Schur complements, whose round-off grows with the conditioning.
inline Matrix clamp_psd(const Matrix& c) {
  if (c.size() == 0) return c;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetric_part(c));
  if (eig.eigenvalues().minCoeff() >= 0.0) return symmetric_part(c);
  const Vector clamped = eig.eigenvalues().cwiseMax(0.0);
  return symmetric_part(eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose());
}

/// Symmetrizes a covariance and clamps round-off negative eigenvalues to 0.
/// Genuinely indefinite input is an error.
inline Matrix repair_covariance(const Matrix& c) {
  if (c.size() == 0) return c;
  Matrix sym = 0.5 * (c + c.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const auto& values = eig.eigenvalues();
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  if (values.minCoeff() >= 0.0) return sym;
  if (values.minCoeff() < -kPsdSlack * scale)
    throw DomainError("covariance is not positive semidefinite (eigenvalue " +
                      std::to_string(values.minCoeff()) + ")");
  Vector clamped = values.cwiseMax(0.0);
  Matrix out = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

/// Row offsets of each factor of `x`.
inline std::vector<Eigen::Index> factor_offsets(const Object& x) {
  std::vector<Eigen::Index> out(x.rank() + 1, 0);
  for (std::size_t i = 0; i < x.rank(); ++i)
    out[i + 1] = out[i] + static_cast<Eigen::Index>(x.factor(i));
  return out;
}

/// Coordinates covered by the selected factors, in order.
inline std::vector<Eigen::Index> factor_rows(const Object& x, std::span<const std::size_t> idx) {
  const auto off = factor_offsets(x);
  std::vector<Eigen::Index> rows;
  for (auto i : idx) {
    if (i >= x.rank()) throw DomainError("factor index out of range");
    for (auto r = off[i]; r < off[i + 1]; ++r) rows.push_back(r);
  }
  return rows;
}

inline Matrix take_rows(const Matrix& m, const std::vector<Eigen::Index>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

inline Matrix take_block(const Matrix& m, const std::vector<Eigen::Index>& rows,
                         const std::vector<Eigen::Index>& cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(rows[i], cols[j]);
  return out;
}

inline Vector take(const Vector& v, const std::vector<Eigen::Index>& rows) {
  Vector out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(rows[i]);
  return out;
}

/// The stochastic affine map x ↦ A x + N(mean, cov).
class GaussMap {
 public:
  GaussMap() = default;

  /// Validating constructor.
  GaussMap(Object source, Object target, Matrix a, Vector mean, Matrix cov)
      : source_(std::move(source)), target_(std::move(target)), a_(std::move(a)),
        mean_(std::move(mean)), cov_(std::move(cov)) {
    const auto n = static_cast<Eigen::Index>(source_.dimension());
    const auto m = static_cast<Eigen::Index>(target_.dimension());
    if (a_.rows() != m || a_.cols() != n || mean_.size() != m || cov_.rows() != m || cov_.cols() != m)
      throw DomainError("GaussMap: dimensions disagree with " + source_.to_string() + " -> " +
                        target_.to_string());
    if (!a_.allFinite() || !mean_.allFinite() || !cov_.allFinite())
      throw DomainError("GaussMap: non-finite entries");
    if (max_abs(cov_ - cov_.transpose()) > 1e-12 * std::max(1.0, max_abs(cov_)))
      throw DomainError("GaussMap: covariance is not symmetric");
    cov_ = repair_covariance(cov_);
  }

  /// A Gaussian state N(mean, cov) on a single factor.
  static GaussMap state(const Vector& mean, const Matrix& cov) {
    const auto d = static_cast<std::size_t>(mean.size());
    return GaussMap(Object::unit(), Object{d}, Matrix::Zero(mean.size(), 0), mean, cov);
  }

  /// x ↦ A x + N(mean, cov) between single-factor objects.
  static GaussMap affine(const Matrix& a, const Vector& mean, const Matrix& cov) {
    return GaussMap(Object{static_cast<std::size_t>(a.cols())},
                    Object{static_cast<std::size_t>(a.rows())}, a, mean, cov);
  }

  const Object& source() const noexcept { return source_; }
  const Object& target() const noexcept { return target_; }
  const Matrix& matrix() const noexcept { return a_; }
  const Vector& mean() const noexcept { return mean_; }
  const Matrix& cov() const noexcept { return cov_; }

 private:
  Object source_;
  Object target_;
  Matrix a_ = Matrix::Zero(0, 0);
  Vector mean_ = Vector::Zero(0);
  Matrix cov_ = Matrix::Zero(0, 0);
};

}  // namespace gauss

/// Euclidean spaces with affine maps plus independent Gaussian noise.
struct Gauss {
  using Morphism = gauss::GaussMap;
  using Point = gauss::Vector;
  using Matrix = gauss::Matrix;
  using Vector = gauss::Vector;

  static constexpr const char* name = "gauss";
  static constexpr std::size_t kOracleDimensionCap = 64;

  static constexpr double default_tolerance() { return 1e-9; }

  static Object source(const Morphism& f) { return f.source(); }
  static Object target(const Morphism& f) { return f.target(); }

  static Morphism identity(const Object& x) {
    const auto d = static_cast<Eigen::Index>(x.dimension());
    return Morphism(x, x, Matrix::Identity(d, d), Vector::Zero(d), Matrix::Zero(d, d));
  }

  static Morphism copy(const Object& x) {
    const auto d = static_cast<Eigen::Index>(x.dimension());
    Matrix a(2 * d, d);
    a << Matrix::Identity(d, d), Matrix::Identity(d, d);
    return Morphism(x, x * x, a, Vector::Zero(2 * d), Matrix::Zero(2 * d, 2 * d));
  }

  static Morphism discard(const Object& x) {
    const auto d = static_cast<Eigen::Index>(x.dimension());
    return Morphism(x, Object::unit(), Matrix::Zero(0, d), Vector::Zero(0), Matrix::Zero(0, 0));
  }

  static Morphism swap(const Object& x, const Object& y) {
    const auto dx = static_cast<Eigen::Index>(x.dimension());
    const auto dy = static_cast<Eigen::Index>(y.dimension());
    Matrix a = Matrix::Zero(dx + dy, dx + dy);
    a.block(0, dx, dy, dy) = Matrix::Identity(dy, dy);
    a.block(dy, 0, dx, dx) = Matrix::Identity(dx, dx);
    return Morphism(x * y, y * x, a, Vector::Zero(dx + dy), Matrix::Zero(dx + dy, dx + dy));
  }

  /// f then g: (BA)x + N(Bμ + ν, BΣBᵀ + Λ).
  static Morphism compose(const Morphism& f, const Morphism& g) {
    if (f.target() != g.source())
      throw DomainError("compose: target " + f.target().to_string() + " does not match source " +
                        g.source().to_string());
    const Matrix& b = g.matrix();
    return Morphism(f.source(), g.target(), b * f.matrix(), b * f.mean() + g.mean(),
                    gauss::symmetric_part(b * f.cov() * b.transpose() + g.cov()));
  }

  static Morphism tensor(const Morphism& f, const Morphism& g) {
    const auto fr = f.matrix().rows(), fc = f.matrix().cols();
    const auto gr = g.matrix().rows(), gc = g.matrix().cols();
    Matrix a = Matrix::Zero(fr + gr, fc + gc);
    a.block(0, 0, fr, fc) = f.matrix();
    a.block(fr, fc, gr, gc) = g.matrix();
    Vector mean(fr + gr);
    mean << f.mean(), g.mean();
    Matrix cov = Matrix::Zero(fr + gr, fr + gr);
    cov.block(0, 0, fr, fr) = f.cov();
    cov.block(fr, fr, gr, gr) = g.cov();
    return Morphism(f.source() * g.source(), f.target() * g.target(), a, mean, cov);
  }

  static Morphism marginal(const Morphism& f, std::span<const std::size_t> keep) {
    check_distinct(keep, f.target().rank());
    const auto rows = gauss::factor_rows(f.target(), keep);
    return Morphism(f.source(), f.target().select(keep), gauss::take_rows(f.matrix(), rows),
                    gauss::take(f.mean(), rows), gauss::take_block(f.cov(), rows, rows));
  }

  static Morphism branch(const Morphism& f, std::span<const std::size_t> idx, const Morphism& k) {
    check_distinct(idx, f.target().rank());
    if (f.target().select(idx) != k.source())
      throw DomainError("branch: selected outputs " + f.target().select(idx).to_string() +
                        " do not match kernel source " + k.source().to_string());
    const auto sel = gauss::factor_rows(f.target(), idx);
    const Matrix& ka = k.matrix();
    const Matrix sel_a = gauss::take_rows(f.matrix(), sel);
    const Vector sel_mean = gauss::take(f.mean(), sel);
    const Matrix sel_cov = gauss::take_rows(f.cov(), sel);  // rows sel, all columns

    const auto t = f.matrix().rows(), z = ka.rows(), n = f.matrix().cols();
    Matrix a(t + z, n);
    a << f.matrix(), ka * sel_a;
    Vector mean(t + z);
    mean << f.mean(), ka * sel_mean + k.mean();
    const Matrix cross = ka * sel_cov;  // z × t
    const auto sel_rows = gauss::take_block(f.cov(), sel, sel);
    Matrix cov(t + z, t + z);
    cov.block(0, 0, t, t) = f.cov();
    cov.block(t, 0, z, t) = cross;
    cov.block(0, t, t, z) = cross.transpose();
    cov.block(t, t, z, z) = gauss::symmetric_part(ka * sel_rows * ka.transpose() + k.cov());
    return Morphism(f.source(), f.target() * k.target(), a, mean, cov);
  }

  /// Conditional of x = M a + ξ, y = N a + η w.r.t. y:
  /// x = (M − K N) a + K y + N(s − K t, C_ξξ − K C_ηξ) with K = C_ξη C_ηη⁻.
  static Morphism conditional(const Morphism& f, const OutputPartition& part) {
    part.validate(f.target().rank());
    const auto xr = gauss::factor_rows(f.target(), part.kept);
    const auto yr = gauss::factor_rows(f.target(), part.conditioned);
    const Matrix m = gauss::take_rows(f.matrix(), xr);
    const Matrix n = gauss::take_rows(f.matrix(), yr);
    const Vector s = gauss::take(f.mean(), xr);
    const Vector t = gauss::take(f.mean(), yr);
    const Matrix cxx = gauss::take_block(f.cov(), xr, xr);
    const Matrix cxy = gauss::take_block(f.cov(), xr, yr);
    const Matrix cyy = gauss::take_block(f.cov(), yr, yr);
    const Matrix gain = cxy * gauss::pinv(cyy);

    const auto dx = static_cast<Eigen::Index>(xr.size());
    const auto da = m.cols();
    const auto dy = static_cast<Eigen::Index>(yr.size());
    Matrix a(dx, da + dy);
    a << m - gain * n, gain;
    return Morphism(f.source() * f.target().select(part.conditioned),
                    f.target().select(part.kept), a, s - gain * t,
                    gauss::clamp_psd(cxx - gain * cxy.transpose() - cxy * gain.transpose() + gain * cyy * gain.transpose()));
  }

  static Morphism point(const Object& x, const Point& v) {
    const auto d = static_cast<Eigen::Index>(x.dimension());
    if (v.size() != d) throw DomainError("point dimension does not match object");
    return Morphism(Object::unit(), x, Matrix::Zero(d, 0), v, Matrix::Zero(d, d));
  }

  /// 1 when v lies in the support (mean + range of cov) of the state, else 0.
  static double weight(const Morphism& state, const Point& v) {
    if (!state.source().is_unit()) throw DomainError("weight: expects a state");
    if (v.size() != state.mean().size()) throw DomainError("weight: dimension mismatch");
    if (v.size() == 0) return 1.0;
    const Vector r = v - state.mean();
    const Vector proj = state.cov() * gauss::pinv(state.cov()) * r;
    return (r - proj).norm() <= 1e-8 * std::max(1.0, r.norm()) ? 1.0 : 0.0;
  }

  /// Largest entrywise difference, relative to max(1, entry magnitude), over
  /// the matrix, mean and covariance.
  static double deviation(const Morphism& f, const Morphism& g) {
    if (f.source() != g.source() || f.target() != g.target())
      throw DomainError("deviation: morphisms are not parallel");
    auto rel = [](const Matrix& a, const Matrix& b) {
      if (a.size() == 0) return 0.0;
      const double scale = std::max({1.0, gauss::max_abs(a), gauss::max_abs(b)});
      return gauss::max_abs(a - b) / scale;
    };
    return std::max({rel(f.matrix(), g.matrix()), rel(f.mean(), g.mean()), rel(f.cov(), g.cov())});
  }

  static Morphism normalize(const Morphism& f) { return f; }

  static void check_oracle_cap(const Object& x) {
    if (x.dimension() > kOracleDimensionCap)
      throw ResourceError("stacked Gaussian of dimension " + std::to_string(x.dimension()) +
                          " exceeds the oracle cap of " + std::to_string(kOracleDimensionCap));
  }
};

using GaussMap = gauss::GaussMap;

namespace gauss {

inline GaussMap compose(const GaussMap& f, const GaussMap& g) { return Gauss::compose(f, g); }

/// Conditional of a joint A → X ⊗ Y on the outputs part.conditioned.
inline GaussMap condition(const GaussMap& joint, const OutputPartition& part) {
  return Gauss::conditional(joint, part);
}

/// Whether the noise covariance is zero (spectral norm ≤ tol).
inline bool is_noise_free(const GaussMap& f, double tol = 1e-10) {
  if (f.cov().size() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(f.cov());
  return eig.eigenvalues().cwiseAbs().maxCoeff() <= tol;
}

/// m + L z with P = L Lᵀ from an eigendecomposition (robust to singular P).
inline Vector sample(const GaussMap& state, std::mt19937_64& rng) {
  if (!state.source().is_unit()) throw DomainError("sample: expects a state");
  const auto d = state.mean().size();
  if (d == 0) return Vector::Zero(0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(d);
  for (Eigen::Index i = 0; i < d; ++i) z(i) = normal(rng);
  if (gauss::max_abs(state.cov()) == 0.0) return state.mean();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(state.cov());
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return state.mean() + eig.eigenvectors() * root.asDiagonal() * z;
}

inline Vector sample(const GaussMap& state, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample(state, rng);
}

/// Draw from the column of f at input x.
inline Vector sample_at(const GaussMap& f, const Vector& x, std::mt19937_64& rng) {
  return sample(Gauss::compose(Gauss::point(f.source(), x), f), rng);
}

}  // namespace gauss

template <>
inline constexpr bool keeps_prediction_on_degenerate<Gauss> = true;

/// Stacks per-factor vectors into one point of the product object.
inline gauss::Vector join_points(const std::vector<gauss::Vector>& parts) {
  Eigen::Index total = 0;
  for (const auto& p : parts) total += p.size();
  gauss::Vector out(total);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.segment(at, p.size()) = p;
    at += p.size();
  }
  return out;
}

}  // namespace markovcat
