#ifndef IFEM_SYSTEM_STATE_HPP
#define IFEM_SYSTEM_STATE_HPP

#include "ifem/linear_algebra.hpp"

namespace ifem {

// Working set of the time stepper: current Newton iterate, previous time
// level, time and the fixed step size.
struct SystemState {
  BlockedVector xi;
  BlockedVector previous_xi;
  double t = 0.0;
  double dt = 1.0;
  int step_index = 0;
};

}  // namespace ifem

#endif
