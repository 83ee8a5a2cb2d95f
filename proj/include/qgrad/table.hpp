#pragma once

#include <optional>
#include <vector>

// Boost 1.74 pchip calls unqualified isnan.
#include <math.h>

#include <boost/math/interpolators/pchip.hpp>

namespace qgrad {

/// Sampled scalar function y(x) evaluated by monotone (shape-preserving)
/// cubic Hermite interpolation. Abscissas must be strictly increasing and at
/// least four; evaluation outside [x.front(), x.back()] throws
/// ErrorKind::domain_error instead of extrapolating.
class MonotoneTable {
 public:
  MonotoneTable() = default;
  MonotoneTable(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  double derivative(double x) const;

  bool empty() const noexcept { return x_.empty(); }
  double min_x() const { return x_.front(); }
  double max_x() const { return x_.back(); }
  const std::vector<double>& xs() const noexcept { return x_; }
  const std::vector<double>& ys() const noexcept { return y_; }

  friend bool operator==(const MonotoneTable& a, const MonotoneTable& b) {
    return a.x_ == b.x_ && a.y_ == b.y_;
  }

 private:
  void check_range(double x) const;

  std::vector<double> x_;
  std::vector<double> y_;
  std::optional<boost::math::interpolators::pchip<std::vector<double>>> interp_;
};

}  // namespace qgrad
