#include "lcl/value.hpp"

#include <cmath>
#include <cstdio>

namespace lcl {

const char* op_name(Op op) {
  switch (op) {
    case Op::kConstant: return "constant";
    case Op::kParameter: return "parameter";
    case Op::kAdd: return "add";
    case Op::kMul: return "mul";
    case Op::kNeg: return "neg";
    case Op::kDiv: return "div";
    case Op::kTanh: return "tanh";
    case Op::kRelu: return "relu";
    case Op::kExp: return "exp";
    case Op::kLog: return "log";
    case Op::kSquare: return "square";
    case Op::kSin: return "sin";
    case Op::kCos: return "cos";
  }
  return "unknown";
}

Value apply_primitive(Op op, std::span<const Value> inputs) {
  const auto need = [&](std::size_t n) {
    if (inputs.size() != n) {
      throw Error(std::string("primitive '") + op_name(op) + "' expects " + std::to_string(n) +
                  " inputs, got " + std::to_string(inputs.size()));
    }
  };
  switch (op) {
    case Op::kConstant:
    case Op::kParameter:
      throw Error(std::string("primitive '") + op_name(op) + "' cannot be applied to inputs");
    case Op::kAdd: need(2); return inputs[0] + inputs[1];
    case Op::kMul: need(2); return inputs[0] * inputs[1];
    case Op::kDiv: need(2); return inputs[0] / inputs[1];
    case Op::kNeg: need(1); return -inputs[0];
    case Op::kTanh: need(1); return tanh(inputs[0]);
    case Op::kRelu: need(1); return relu(inputs[0]);
    case Op::kExp: need(1); return exp(inputs[0]);
    case Op::kLog: need(1); return log(inputs[0]);
    case Op::kSquare: need(1); return square(inputs[0]);
    case Op::kSin: need(1); return sin(inputs[0]);
    case Op::kCos: need(1); return cos(inputs[0]);
  }
  throw Error("unknown primitive");
}

Eigen::VectorXd backward(const Value& root, const ParamStore& params) {
  Tape* tape = root.tape();
  if (tape == nullptr) throw Error("backward: root is not attached to a tape");
  if (tape->bound_store() != nullptr && tape->bound_store() != &params) {
    throw Error("backward: tape was recorded against a different parameter store");
  }

  const std::int32_t root_id = root.id();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.size());

  // Forward values must be finite before adjoints mean anything; report the
  // earliest offender so the source of a blow-up is identifiable.
  for (std::int32_t i = 0; i <= root_id; ++i) {
    if (!std::isfinite(tape->node(i).value)) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "backward: non-finite value at node %d (%s)", i,
                    op_name(tape->node(i).op));
      throw NumericError(buf);
    }
  }

  std::vector<double> adjoint(static_cast<std::size_t>(root_id) + 1, 0.0);
  adjoint[static_cast<std::size_t>(root_id)] = 1.0;

  const std::vector<std::uint8_t>& frozen = params.frozen_mask();
  for (std::int32_t i = root_id; i >= 0; --i) {
    const double a = adjoint[static_cast<std::size_t>(i)];
    if (a == 0.0) continue;
    const Node& n = tape->node(i);
    if (n.op == Op::kParameter) {
      if (!frozen[static_cast<std::size_t>(n.p0)]) grad[n.p0] += a;
      continue;
    }
    if (n.p0 >= 0) adjoint[static_cast<std::size_t>(n.p0)] += a * n.d0;
    if (n.p1 >= 0) adjoint[static_cast<std::size_t>(n.p1)] += a * n.d1;
  }
  return grad;
}

}  // namespace lcl
