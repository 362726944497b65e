#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace scenesynth {

// Square band matrix with `lower` sub- and `upper` super-diagonals. Storage
// reserves `lower` extra super-diagonals for the fill-in produced by
// partially pivoted LU.
class BandMatrix {
 public:
  BandMatrix(std::size_t n, std::size_t lower, std::size_t upper);

  std::size_t size() const { return n_; }
  std::size_t lower() const { return lower_; }
  std::size_t upper() const { return upper_; }

  bool in_band(std::size_t i, std::size_t j) const;
  double get(std::size_t i, std::size_t j) const;
  // i, j must lie within the declared band.
  double& at(std::size_t i, std::size_t j);

  std::vector<double> multiply(std::span<const double> x) const;
  double max_abs() const;

 private:
  friend class BandLU;
  double& raw(std::size_t i, std::size_t j) { return data_[i * width_ + (j + lower_ - i)]; }
  double raw(std::size_t i, std::size_t j) const { return data_[i * width_ + (j + lower_ - i)]; }

  std::size_t n_, lower_, upper_, width_;
  std::vector<double> data_;
};

// LU factorization with partial (row) pivoting, band-limited. Throws
// SingularSystemError when a pivot falls below `relative_tolerance` times
// the largest matrix entry.
class BandLU {
 public:
  explicit BandLU(BandMatrix a, double relative_tolerance = 1e-13);

  std::vector<double> solve(std::span<const double> b) const;

 private:
  BandMatrix lu_;
  std::vector<std::size_t> pivots_;
};

}  // namespace scenesynth
