#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "lcl/error.hpp"
#include "lcl/param_store.hpp"

namespace lcl {

// Scalar reverse-mode autodiff on an append-only tape. Local partials are
// computed at construction time, so the reverse sweep is a single pass of
// multiply-accumulates over the node array.

enum class Op : std::uint8_t {
  kConstant,
  kParameter,
  kAdd,
  kMul,
  kNeg,
  kDiv,
  kTanh,
  kRelu,
  kExp,
  kLog,
  kSquare,
  kSin,
  kCos,
};

const char* op_name(Op op);

// One recorded operation. Invariant: parent ids are strictly smaller than the
// node's own id, so ids give a valid evaluation order. kParameter keeps the
// flat parameter index in p0.
struct Node {
  double value;
  double d0;
  double d1;
  std::int32_t p0;
  std::int32_t p1;
  Op op;
};

class Tape;

// Handle to a tape node. Cheap to copy; carries the forward value so that
// arithmetic never re-reads the tape.
class Value {
 public:
  Value() = default;

  double value() const { return value_; }
  std::int32_t id() const { return id_; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Value(Tape* tape, std::int32_t id, double value) : tape_(tape), id_(id), value_(value) {}

  Tape* tape_ = nullptr;
  std::int32_t id_ = -1;
  double value_ = 0.0;
};

class Tape {
 public:
  Value constant(double v) { return emit(Op::kConstant, v, 0.0, 0.0, -1, -1); }

  // Binds one parameter as a leaf node. All parameters recorded on a tape must
  // come from the same store. Binding the same index more than once is fine;
  // the adjoint contributions add up.
  Value parameter(const ParamStore& store, Eigen::Index index) {
    if (store_ == nullptr) {
      store_ = &store;
    } else if (store_ != &store) {
      throw Error("tape is already bound to a different parameter store");
    }
    if (index < 0 || index >= store.size()) throw Error("parameter index out of range");
    return emit(Op::kParameter, store.value(index), 0.0, 0.0, static_cast<std::int32_t>(index), -1);
  }

  std::size_t size() const { return nodes_.size(); }
  void reserve(std::size_t n) { nodes_.reserve(n); }

  // Drops all nodes and the store binding. Keeps the allocation.
  void reset() {
    nodes_.clear();
    store_ = nullptr;
  }

  const Node& node(std::int32_t id) const { return nodes_[static_cast<std::size_t>(id)]; }
  const ParamStore* bound_store() const { return store_; }

  Value emit(Op op, double value, double d0, double d1, std::int32_t p0, std::int32_t p1) {
    if (nodes_.size() >= static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
      throw Error("tape node limit exceeded");
    }
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{value, d0, d1, p0, p1, op});
    return Value(this, id, value);
  }

 private:
  std::vector<Node> nodes_;
  const ParamStore* store_ = nullptr;
};

namespace detail {

inline Tape* require_same_tape(const Value& a, const Value& b) {
  Tape* tape = a.tape();
  if (tape == nullptr || tape != b.tape()) throw Error("operands belong to different tapes");
  return tape;
}

inline Tape* require_tape(const Value& a) {
  Tape* tape = a.tape();
  if (tape == nullptr) throw Error("value is not attached to a tape");
  return tape;
}

}  // namespace detail

inline Value operator+(const Value& a, const Value& b) {
  Tape* t = detail::require_same_tape(a, b);
  return t->emit(Op::kAdd, a.value() + b.value(), 1.0, 1.0, a.id(), b.id());
}

inline Value operator*(const Value& a, const Value& b) {
  Tape* t = detail::require_same_tape(a, b);
  return t->emit(Op::kMul, a.value() * b.value(), b.value(), a.value(), a.id(), b.id());
}

inline Value operator-(const Value& a) {
  Tape* t = detail::require_tape(a);
  return t->emit(Op::kNeg, -a.value(), -1.0, 0.0, a.id(), -1);
}

inline Value operator/(const Value& a, const Value& b) {
  Tape* t = detail::require_same_tape(a, b);
  if (b.value() == 0.0) throw NumericError("division by zero while recording node");
  // The primal must be a real division: a * (1/b) rounds twice and can drift a
  // ulp from the untaped result. The partials tolerate the cheaper form.
  const double inv = 1.0 / b.value();
  return t->emit(Op::kDiv, a.value() / b.value(), inv, -a.value() * inv * inv, a.id(), b.id());
}

inline Value operator-(const Value& a, const Value& b) { return a + (-b); }

inline Value tanh(const Value& a) {
  Tape* t = detail::require_tape(a);
  const double y = std::tanh(a.value());
  return t->emit(Op::kTanh, y, 1.0 - y * y, 0.0, a.id(), -1);
}

// relu(x) = max(0, x); the subgradient at 0 is taken as 0.
inline Value relu(const Value& a) {
  Tape* t = detail::require_tape(a);
  const bool on = a.value() > 0.0;
  return t->emit(Op::kRelu, on ? a.value() : 0.0, on ? 1.0 : 0.0, 0.0, a.id(), -1);
}

inline Value max0(const Value& a) { return relu(a); }

inline Value exp(const Value& a) {
  Tape* t = detail::require_tape(a);
  const double y = std::exp(a.value());
  return t->emit(Op::kExp, y, y, 0.0, a.id(), -1);
}

inline Value log(const Value& a) {
  Tape* t = detail::require_tape(a);
  return t->emit(Op::kLog, std::log(a.value()), 1.0 / a.value(), 0.0, a.id(), -1);
}

inline Value square(const Value& a) {
  Tape* t = detail::require_tape(a);
  return t->emit(Op::kSquare, a.value() * a.value(), 2.0 * a.value(), 0.0, a.id(), -1);
}

inline Value sin(const Value& a) {
  Tape* t = detail::require_tape(a);
  return t->emit(Op::kSin, std::sin(a.value()), std::cos(a.value()), 0.0, a.id(), -1);
}

inline Value cos(const Value& a) {
  Tape* t = detail::require_tape(a);
  return t->emit(Op::kCos, std::cos(a.value()), -std::sin(a.value()), 0.0, a.id(), -1);
}

inline Value operator+(const Value& a, double c) { return a + detail::require_tape(a)->constant(c); }
inline Value operator+(double c, const Value& a) { return detail::require_tape(a)->constant(c) + a; }
inline Value operator*(const Value& a, double c) { return a * detail::require_tape(a)->constant(c); }
inline Value operator*(double c, const Value& a) { return detail::require_tape(a)->constant(c) * a; }
inline Value operator-(const Value& a, double c) { return a - detail::require_tape(a)->constant(c); }
inline Value operator-(double c, const Value& a) { return detail::require_tape(a)->constant(c) - a; }
inline Value operator/(const Value& a, double c) { return a / detail::require_tape(a)->constant(c); }
inline Value operator/(double c, const Value& a) { return detail::require_tape(a)->constant(c) / a; }

// Runtime-dispatched node construction, mainly for property tests that sweep
// over the primitive set. kConstant and kParameter are not applicable.
Value apply_primitive(Op op, std::span<const Value> inputs);

// Gradient of `root` with respect to every parameter in `params`. Frozen
// parameters report zero. Throws NumericError naming the first node holding a
// non-finite value, so training code can surface where a blow-up started.
Eigen::VectorXd backward(const Value& root, const ParamStore& params);

}  // namespace lcl
