#include "scenesynth/band_solver.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "scenesynth/errors.hpp"

namespace scenesynth {

BandMatrix::BandMatrix(std::size_t n, std::size_t lower, std::size_t upper)
    : n_(n), lower_(lower), upper_(upper), width_(2 * lower + upper + 1), data_(n * width_, 0.0) {}

bool BandMatrix::in_band(std::size_t i, std::size_t j) const {
  return i < n_ && j < n_ && j + lower_ >= i && j <= i + upper_;
}

double BandMatrix::get(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_ || j + lower_ < i || j > i + upper_ + lower_) return 0.0;
  return raw(i, j);
}

double& BandMatrix::at(std::size_t i, std::size_t j) {
  if (!in_band(i, j)) throw DomainError(fmt::format("entry ({}, {}) outside the band", i, j));
  return raw(i, j);
}

std::vector<double> BandMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t j0 = i > lower_ ? i - lower_ : 0;
    const std::size_t j1 = std::min(n_ - 1, i + upper_);
    double acc = 0.0;
    for (std::size_t j = j0; j <= j1; ++j) acc += raw(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

double BandMatrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

BandLU::BandLU(BandMatrix a, double relative_tolerance) : lu_(std::move(a)), pivots_(lu_.n_) {
  const std::size_t n = lu_.n_;
  const std::size_t kl = lu_.lower_;
  const std::size_t span = kl + lu_.upper_;
  const double tol = relative_tolerance * lu_.max_abs();

  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t last_row = std::min(n - 1, k + kl);
    const std::size_t last_col = std::min(n - 1, k + span);

    std::size_t p = k;
    for (std::size_t i = k + 1; i <= last_row; ++i) {
      if (std::abs(lu_.raw(i, k)) > std::abs(lu_.raw(p, k))) p = i;
    }
    if (!(std::abs(lu_.raw(p, k)) > tol)) {
      throw SingularSystemError(fmt::format("band system is singular at column {} (pivot {:.3e})", k,
                                            lu_.raw(p, k)));
    }
    pivots_[k] = p;
    if (p != k) {
      for (std::size_t j = k; j <= last_col; ++j) std::swap(lu_.raw(k, j), lu_.raw(p, j));
    }

    const double pivot = lu_.raw(k, k);
    for (std::size_t i = k + 1; i <= last_row; ++i) {
      const double m = lu_.raw(i, k) / pivot;
      lu_.raw(i, k) = m;
      if (m == 0.0) continue;
      for (std::size_t j = k + 1; j <= last_col; ++j) lu_.raw(i, j) -= m * lu_.raw(k, j);
    }
  }
}

std::vector<double> BandLU::solve(std::span<const double> b) const {
  const std::size_t n = lu_.n_;
  const std::size_t kl = lu_.lower_;
  const std::size_t span = kl + lu_.upper_;
  if (b.size() != n) throw DomainError("right-hand side size mismatch");

  std::vector<double> x(b.begin(), b.end());
  for (std::size_t k = 0; k < n; ++k) {
    std::swap(x[k], x[pivots_[k]]);
    const std::size_t last_row = std::min(n - 1, k + kl);
    for (std::size_t i = k + 1; i <= last_row; ++i) x[i] -= lu_.raw(i, k) * x[k];
  }
  for (std::size_t i = n; i-- > 0;) {
    const std::size_t last_col = std::min(n - 1, i + span);
    double acc = x[i];
    for (std::size_t j = i + 1; j <= last_col; ++j) acc -= lu_.raw(i, j) * x[j];
    x[i] = acc / lu_.raw(i, i);
  }
  return x;
}

}  // namespace scenesynth
