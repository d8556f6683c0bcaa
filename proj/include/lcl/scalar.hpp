#pragma once

#include <cmath>

#include "lcl/value.hpp"

namespace lcl {

// Plain-double twins of the tape primitives. Generic code written against
// these runs identically with S = double and S = Value, which is what makes
// reported loss values bit-equal to the training objectives.

inline double relu(double x) { return x > 0.0 ? x : 0.0; }
inline double max0(double x) { return relu(x); }
inline double square(double x) { return x * x; }
using std::cos;
using std::exp;
using std::log;
using std::sin;
using std::tanh;

// Lifts double constants into the scalar domain S.
struct PlainCtx {
  double lift(double c) const { return c; }
};

struct TapeCtx {
  Tape* tape = nullptr;
  Value lift(double c) const { return tape->constant(c); }
};

// Hard clamp built from relu so it differentiates: lo for x < lo, x inside,
// hi above. Exact at the ends; interior values are reproduced only up to
// roundoff of lo + (x - lo).
template <class S, class Ctx>
S clamp_range(Ctx& cx, const S& x, double lo, double hi) {
  return cx.lift(lo) + relu(x - cx.lift(lo)) - relu(x - cx.lift(hi));
}

}  // namespace lcl
