#include "qgrad/table.hpp"

#include <cmath>
#include <sstream>

#include "qgrad/error.hpp"

namespace qgrad {

MonotoneTable::MonotoneTable(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  if (x_.size() != y_.size()) {
    throw Error(ErrorKind::invalid_table, "table abscissa/ordinate size mismatch");
  }
  if (x_.size() < 4) {
    throw Error(ErrorKind::invalid_table, "table needs at least four samples");
  }
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (!std::isfinite(x_[i]) || !std::isfinite(y_[i])) {
      throw Error(ErrorKind::invalid_table, "table contains a non-finite sample");
    }
    if (i > 0 && !(x_[i] > x_[i - 1])) {
      std::ostringstream msg;
      msg << "table abscissas must be strictly increasing (index " << i << ")";
      throw Error(ErrorKind::invalid_table, msg.str());
    }
  }
  auto xs = x_;
  auto ys = y_;
  interp_.emplace(std::move(xs), std::move(ys));
}

void MonotoneTable::check_range(double x) const {
  if (!interp_) {
    throw Error(ErrorKind::invalid_table, "evaluation of an empty table");
  }
  if (!(x >= x_.front() && x <= x_.back())) {
    std::ostringstream msg;
    msg << "table evaluation at " << x << " requires extrapolation beyond ["
        << x_.front() << ", " << x_.back() << "]";
    throw Error(ErrorKind::domain_error, msg.str());
  }
}

double MonotoneTable::operator()(double x) const {
  check_range(x);
  return (*interp_)(x);
}

double MonotoneTable::derivative(double x) const {
  check_range(x);
  return interp_->prime(x);
}

}  // namespace qgrad
