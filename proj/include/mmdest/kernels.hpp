#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mmdest {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

enum class KernelFamily { Gaussian, Laplace };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

/// Radial kernel k(x, y) = F(||x - y||) normalized so that k(x, x) = 1.
///
/// Gaussian: F(r) = exp(-r^2 / gamma^2).  Laplace: F(r) = exp(-r / gamma).
/// Both are characteristic on R^d and bounded by one.
template <typename Scalar = double>
class Kernel {
 public:
  Kernel(KernelFamily family, Scalar bandwidth) : family_(family), bandwidth_(bandwidth) {
    if (!(bandwidth > Scalar(0)) || !std::isfinite(static_cast<double>(bandwidth))) {
      throw std::invalid_argument("kernel bandwidth must be positive and finite");
    }
  }

  static Kernel gaussian(Scalar bandwidth) { return Kernel(KernelFamily::Gaussian, bandwidth); }
  static Kernel laplace(Scalar bandwidth) { return Kernel(KernelFamily::Laplace, bandwidth); }

  KernelFamily family() const { return family_; }
  Scalar bandwidth() const { return bandwidth_; }

  /// Radial profile F evaluated at a squared distance.
  Scalar profile_sq(Scalar squared_distance) const {
    if (family_ == KernelFamily::Gaussian) {
      return std::exp(-squared_distance / (bandwidth_ * bandwidth_));
    }
    return std::exp(-std::sqrt(squared_distance) / bandwidth_);
  }

  /// Radial profile K(u) of a scalar displacement u (used by the translation-model gradient).
  Scalar profile(Scalar displacement) const { return profile_sq(displacement * displacement); }

  /// Lipschitz constant of the radial profile F on [0, inf).
  ///
  /// Laplace: 1/gamma.  Gaussian: max |F'(r)| attained at r = gamma / sqrt(2),
  /// which gives sqrt(2) / (gamma * e^{1/2}).
  Scalar lipschitz() const {
    if (family_ == KernelFamily::Laplace) return Scalar(1) / bandwidth_;
    return std::sqrt(Scalar(2)) / (bandwidth_ * std::exp(Scalar(0.5)));
  }

  template <typename DerivedX, typename DerivedY>
  Scalar operator()(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y) const {
    if (x.size() != y.size()) throw std::invalid_argument("kernel evaluation: dimension mismatch");
    return profile_sq((x - y).squaredNorm());
  }

  /// Element-wise profile of a matrix of squared distances.
  Matrix<Scalar> apply_sq(const Matrix<Scalar>& squared_distances) const {
    if (family_ == KernelFamily::Gaussian) {
      return (squared_distances.array() * (Scalar(-1) / (bandwidth_ * bandwidth_))).exp().matrix();
    }
    return (squared_distances.array().sqrt() * (Scalar(-1) / bandwidth_)).exp().matrix();
  }

 private:
  KernelFamily family_;
  Scalar bandwidth_;
};

/// Squared Euclidean distances between the rows of x (n x d) and the rows of y (m x d).
template <typename Scalar>
Matrix<Scalar> squared_distances(const Matrix<Scalar>& x, const Matrix<Scalar>& y) {
  if (x.cols() != y.cols()) throw std::invalid_argument("squared_distances: dimension mismatch");
  if (x.cols() <= 4) {
    // Direct differences: cheaper than a matrix product with a tiny inner dimension.
    Matrix<Scalar> d2 = Matrix<Scalar>::Zero(x.rows(), y.rows());
    for (Eigen::Index j = 0; j < y.rows(); ++j)
      for (Eigen::Index c = 0; c < x.cols(); ++c) d2.col(j).array() += (x.col(c).array() - y(j, c)).square();
    return d2;
  }
  const Vector<Scalar> xx = x.rowwise().squaredNorm();
  const Vector<Scalar> yy = y.rowwise().squaredNorm();
  Matrix<Scalar> d2 = Scalar(-2) * (x * y.transpose());
  d2.colwise() += xx;
  d2.rowwise() += yy.transpose();
  return d2.cwiseMax(Scalar(0));
}

/// Gram matrix K_ij = k(x_i, y_j) between the rows of two samples.
template <typename Scalar>
Matrix<Scalar> gram(const Kernel<Scalar>& k, const Matrix<Scalar>& x, const Matrix<Scalar>& y) {
  return k.apply_sq(squared_distances(x, y));
}

/// Column sums S_j = sum_i k(x_i, y_j), accumulated over row blocks of x so the
/// full Gram matrix is never formed. Blocks are visited in index order.
template <typename Scalar>
Vector<Scalar> gram_col_sums(const Kernel<Scalar>& k, const Matrix<Scalar>& x, const Matrix<Scalar>& y,
                             Eigen::Index block_rows = 256) {
  if (x.cols() != y.cols()) throw std::invalid_argument("gram_col_sums: dimension mismatch");
  const Scalar gamma = k.bandwidth();
  const bool gaussian = k.family() == KernelFamily::Gaussian;
  // Gaussian blocks hold -d^2 / gamma^2 directly, Laplace blocks hold -d^2.
  const Scalar scale = gaussian ? Scalar(1) / (gamma * gamma) : Scalar(1);
  const Vector<Scalar> yy = scale * y.rowwise().squaredNorm();
  Vector<Scalar> sums = Vector<Scalar>::Zero(y.rows());
  Matrix<Scalar> block;
  Vector<Scalar> xx;
  for (Eigen::Index start = 0; start < x.rows(); start += block_rows) {
    const Eigen::Index rows = std::min(block_rows, x.rows() - start);
    const auto xb = x.middleRows(start, rows);
    if (x.cols() <= 4) {
      block.setZero(rows, y.rows());
      for (Eigen::Index j = 0; j < y.rows(); ++j)
        for (Eigen::Index c = 0; c < x.cols(); ++c) block.col(j).array() -= (xb.col(c).array() - y(j, c)).square();
      if (gaussian) block *= scale;
    } else {
      xx = scale * xb.rowwise().squaredNorm();
      block.noalias() = (Scalar(2) * scale) * (xb * y.transpose());
      block.colwise() -= xx;
      block.rowwise() -= yy.transpose();
      block = block.cwiseMin(Scalar(0));
    }
    if (gaussian) {
      block.array() = block.array().exp();
    } else {
      block.array() = ((-block.array()).sqrt() * (Scalar(-1) / gamma)).exp();
    }
    sums.noalias() += block.colwise().sum().transpose();
  }
  return sums;
}

/// Kernel used throughout the simulation study: Gaussian with gamma^2 = d.
template <typename Scalar = double>
Kernel<Scalar> default_experiment_kernel(int dimension) {
  if (dimension < 1) throw std::invalid_argument("default_experiment_kernel: dimension must be >= 1");
  return Kernel<Scalar>::gaussian(std::sqrt(static_cast<Scalar>(dimension)));
}

}  // namespace mmdest
