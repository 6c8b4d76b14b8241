#pragma once

#include <cmath>

#include "pmd/special_functions.hpp"

namespace pmd {

// Running Neumaier sum.
class CompensatedSum {
 public:
  void add(Real x) {
    const Real t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  Real value() const { return sum_ + comp_; }

 private:
  Real sum_ = 0;
  Real comp_ = 0;
};

}  // namespace pmd
