#include "lcl/losses.hpp"

#include <span>
#include <vector>

#include "lcl/error.hpp"
#include "lcl/mlp.hpp"
#include "lcl/scalar.hpp"

namespace lcl {

namespace {

void check_batch(const LossBatch& batch, const char* who, int state_dim, int action_dim,
                 int goal_dim) {
  if (batch.size() == 0) throw Error(std::string(who) + ": empty batch");
  if (batch.s.rows() != state_dim || batch.s_observed.rows() != state_dim) {
    throw Error(std::string(who) + ": state dimension mismatch");
  }
  if (batch.tau_run.rows() != action_dim) {
    throw Error(std::string(who) + ": action dimension mismatch");
  }
  if (batch.s_observed.cols() != batch.size() || batch.tau_run.cols() != batch.size()) {
    throw Error(std::string(who) + ": batch length mismatch");
  }
  if (goal_dim >= 0) {
    if (batch.s_desired.rows() != goal_dim || batch.s_desired.cols() != batch.size()) {
      throw Error(std::string(who) + ": desired-state shape mismatch");
    }
  }
}

void require_frozen(const ParamStore& store, const EnsembleForwardModel& f, const char* who) {
  for (int seg : f.segments) {
    if (!store.frozen(seg)) {
      throw Error(std::string(who) + ": forward-model segment '" + store.segment(seg).name +
                  "' must be frozen while the controller trains");
    }
  }
}

// Task coordinates of a predicted state, in the order of g.task_dims. The
// select map reads the dims straight off the prediction; the planar map
// accumulates the chain's tip point and tip velocity from the leading n
// joint positions and the following n joint velocities:
//   th_i = q_0 + .. + q_i,  tip = sum_i l_i (cos th_i, sin th_i),
//   tip' = sum_i l_i th'_i (-sin th_i, cos th_i).
template <class S, class Ctx>
void task_coords(Ctx& cx, const TaskMap& map, const ControllerModel& g,
                 const std::vector<S>& s_p, std::vector<S>& out) {
  out.clear();
  if (!map.planar()) {
    for (int j = 0; j < g.goal_dim(); ++j) {
      out.push_back(s_p[static_cast<std::size_t>(g.task_dims[j])]);
    }
    return;
  }
  const auto n = static_cast<std::size_t>(map.link_lengths.size());
  if (g.goal_dim() != 4 || s_p.size() < 2 * n) {
    throw Error("task_coords: planar map expects [q, qd] leading dims and a 4-dim task");
  }
  S th = cx.lift(0.0), thd = cx.lift(0.0);
  S x = cx.lift(0.0), y = cx.lift(0.0), vx = cx.lift(0.0), vy = cx.lift(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    th = th + s_p[i];
    thd = thd + s_p[n + i];
    const S ci = cos(th);
    const S si = sin(th);
    const double l = map.link_lengths[static_cast<Eigen::Index>(i)];
    x = x + cx.lift(l) * ci;
    y = y + cx.lift(l) * si;
    vx = vx - cx.lift(l) * thd * si;
    vy = vy + cx.lift(l) * thd * ci;
  }
  out = {x, y, vx, vy};
}

// Shared evaluation of every controller objective. S is double for plain
// evaluation or Value on a tape; both run node-for-node identical arithmetic.
template <class S, class Ctx>
S controller_objective(Ctx& cx, LossKind kind, const EnsembleForwardModel& f,
                       const ControllerModel& g, const std::vector<std::span<const S>>& f_params,
                       std::span<const S> g_params, const Normalizer& norm,
                       const LossBatch& batch, const TaskMap& map) {
  const Eigen::Index n = batch.size();
  S total = cx.lift(0.0);
  std::vector<S> coords;
  for (Eigen::Index b = 0; b < n; ++b) {
    const Eigen::VectorXd s = batch.s.col(b);

    if (kind == LossKind::kInverseSupervised) {
      Eigen::VectorXd observed_task(g.goal_dim());
      for (int j = 0; j < g.goal_dim(); ++j) {
        observed_task[j] = batch.s_observed(g.task_dims[j], b);
      }
      const std::vector<S> tau = controller_output(cx, norm, g, g_params, s, observed_task);
      for (int a = 0; a < g.action_dim(); ++a) {
        const S r = (tau[static_cast<std::size_t>(a)] - cx.lift(batch.tau_run(a, b))) *
                    cx.lift(1.0 / norm.a_std[a]);
        total = total + square(r);
      }
      continue;
    }

    const Eigen::VectorXd s_star = batch.s_desired.col(b);
    const std::vector<S> tau = controller_output(cx, norm, g, g_params, s, s_star);
    const std::vector<S> s_p =
        predict_next_state(cx, norm, f.member_spec, f_params, f.logvar_min, f.logvar_max, s,
                           std::span<const S>(tau));

    if (kind != LossKind::kInverseSupervised) task_coords(cx, map, g, s_p, coords);

    if (kind == LossKind::kTask || kind == LossKind::kJoint) {
      for (int j = 0; j < g.goal_dim(); ++j) {
        const int d = g.task_dims[j];
        const S r = (coords[static_cast<std::size_t>(j)] - cx.lift(s_star[j])) *
                    cx.lift(1.0 / norm.s_std[d]);
        total = total + square(r);
      }
    }
    if (kind == LossKind::kJoint) {
      for (int d = 0; d < f.state_dim; ++d) {
        const S r = (s_p[static_cast<std::size_t>(d)] - cx.lift(batch.s_observed(d, b))) *
                    cx.lift(1.0 / norm.s_std[d]);
        total = total + square(r);
      }
    }
    if (kind == LossKind::kDistalTeacher) {
      for (int j = 0; j < g.goal_dim(); ++j) {
        const int d = g.task_dims[j];
        const S w = cx.lift(1.0 / norm.s_std[d]);
        const S to_desired = (coords[static_cast<std::size_t>(j)] - cx.lift(s_star[j])) * w;
        const S to_observed =
            (coords[static_cast<std::size_t>(j)] - cx.lift(batch.s_observed(d, b))) * w;
        total = total + square(to_desired);
        total = total - square(to_observed);
      }
    }
  }
  return total / cx.lift(static_cast<double>(n));
}

Value controller_objective_graph(Tape& tape, LossKind kind, const ParamStore& store,
                                 const EnsembleForwardModel& f, const ControllerModel& g,
                                 const Normalizer& norm, const LossBatch& batch,
                                 const char* who) {
  check_batch(batch, who, f.state_dim, g.action_dim(), g.goal_dim());
  if (kind != LossKind::kInverseSupervised) require_frozen(store, f, who);

  TapeCtx cx{&tape};
  std::vector<std::vector<Value>> member_values;
  std::vector<std::span<const Value>> f_params;
  if (kind != LossKind::kInverseSupervised) {
    member_values.reserve(f.segments.size());
    for (int seg : f.segments) {
      member_values.push_back(bind_segment(tape, store, seg));
      f_params.emplace_back(member_values.back());
    }
  }
  const std::vector<Value> g_values = bind_segment(tape, store, g.segment);
  return controller_objective<Value>(cx, kind, f, g, f_params,
                                     std::span<const Value>(g_values), norm, batch);
}

}  // namespace

const char* loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::kJoint: return "joint";
    case LossKind::kTask: return "task";
    case LossKind::kInverseSupervised: return "inverse_supervised";
    case LossKind::kDistalTeacher: return "distal_teacher";
  }
  return "unknown";
}

LossKind loss_kind_from_name(const std::string& name) {
  if (name == "joint") return LossKind::kJoint;
  if (name == "task") return LossKind::kTask;
  if (name == "inverse_supervised") return LossKind::kInverseSupervised;
  if (name == "distal_teacher") return LossKind::kDistalTeacher;
  throw ConfigError("unknown loss kind '" + name + "'");
}

Value forward_sup_loss(Tape& tape, const ParamStore& store, const EnsembleForwardModel& f,
                       int member, const Normalizer& norm, const LossBatch& batch) {
  check_batch(batch, "forward_sup_loss", f.state_dim, f.action_dim, -1);
  if (member < 0 || member >= f.members()) throw Error("forward_sup_loss: no such member");

  TapeCtx cx{&tape};
  const std::vector<Value> params =
      bind_segment(tape, store, f.segments[static_cast<std::size_t>(member)]);
  const std::span<const Value> pspan(params);

  const auto dim = static_cast<std::size_t>(f.state_dim);
  std::vector<Value> x, target, mean, logvar;
  Value total = tape.constant(0.0);
  for (Eigen::Index b = 0; b < batch.size(); ++b) {
    x.clear();
    for (int d = 0; d < f.state_dim; ++d) {
      x.push_back(cx.lift((batch.s(d, b) - norm.s_mean[d]) / norm.s_std[d]));
    }
    for (int a = 0; a < f.action_dim; ++a) {
      x.push_back(cx.lift((batch.tau_run(a, b) - norm.a_mean[a]) * (1.0 / norm.a_std[a])));
    }
    target.clear();
    for (std::size_t d = 0; d < dim; ++d) {
      const auto r = static_cast<Eigen::Index>(d);
      target.push_back(
          cx.lift((batch.s_observed(r, b) - batch.s(r, b) - norm.d_mean[r]) / norm.d_std[r]));
    }
    const std::vector<Value> raw = mlp_apply(f.member_spec, pspan, std::span<const Value>(x));
    gaussian_head(cx, std::span<const Value>(raw), f.logvar_min, f.logvar_max, mean, logvar);
    total = total + gaussian_nll_logvar(cx, std::span<const Value>(mean),
                                        std::span<const Value>(logvar),
                                        std::span<const Value>(target));
  }
  return total / tape.constant(static_cast<double>(batch.size()));
}

Value task_loss(Tape& tape, const ParamStore& store, const EnsembleForwardModel& f,
                const ControllerModel& g, const Normalizer& norm, const LossBatch& batch) {
  return controller_objective_graph(tape, LossKind::kTask, store, f, g, norm, batch, "task_loss");
}

Value inverse_sup_loss(Tape& tape, const ParamStore& store, const ControllerModel& g,
                       const Normalizer& norm, const LossBatch& batch) {
  check_batch(batch, "inverse_sup_loss", g.state_dim, g.action_dim(), -1);
  TapeCtx cx{&tape};
  const std::vector<Value> g_values = bind_segment(tape, store, g.segment);
  EnsembleForwardModel unused;
  unused.state_dim = g.state_dim;
  return controller_objective<Value>(cx, LossKind::kInverseSupervised, unused, g, {},
                                     std::span<const Value>(g_values), norm, batch);
}

Value joint_loss(Tape& tape, const ParamStore& store, const EnsembleForwardModel& f,
                 const ControllerModel& g, const Normalizer& norm, const LossBatch& batch) {
  return controller_objective_graph(tape, LossKind::kJoint, store, f, g, norm, batch,
                                    "joint_loss");
}

Value distal_teacher_loss(Tape& tape, const ParamStore& store, const EnsembleForwardModel& f,
                          const ControllerModel& g, const Normalizer& norm,
                          const LossBatch& batch) {
  return controller_objective_graph(tape, LossKind::kDistalTeacher, store, f, g, norm, batch,
                                    "distal_teacher_loss");
}

ControllerGrad controller_grad(Tape& tape, LossKind kind, ParamStore& store,
                               const EnsembleForwardModel& f, const ControllerModel& g,
                               const Normalizer& norm, const LossBatch& batch) {
  tape.reset();
  const FreezeGuard guard(store, f.segments);

  Value root = [&] {
    switch (kind) {
      case LossKind::kTask: return task_loss(tape, store, f, g, norm, batch);
      case LossKind::kJoint: return joint_loss(tape, store, f, g, norm, batch);
      case LossKind::kInverseSupervised: return inverse_sup_loss(tape, store, g, norm, batch);
      case LossKind::kDistalTeacher:
        return distal_teacher_loss(tape, store, f, g, norm, batch);
    }
    throw Error("controller_grad: unknown loss kind");
  }();

  ControllerGrad out;
  out.loss = root.value();
  out.grad = backward(root, store);
  return out;
}

double controller_loss_value(LossKind kind, const ParamStore& store,
                             const EnsembleForwardModel& f, const ControllerModel& g,
                             const Normalizer& norm, const LossBatch& batch) {
  const char* who = "controller_loss_value";
  if (kind == LossKind::kInverseSupervised) {
    check_batch(batch, who, g.state_dim, g.action_dim(), -1);
  } else {
    check_batch(batch, who, f.state_dim, g.action_dim(), g.goal_dim());
  }

  PlainCtx cx;
  std::vector<std::span<const double>> f_params;
  if (kind != LossKind::kInverseSupervised) {
    for (int seg : f.segments) f_params.push_back(segment_span(store, seg));
  }
  const Eigen::Ref<const Eigen::VectorXd> g_values = store.segment_values(g.segment);
  const std::span<const double> g_params(g_values.data(),
                                         static_cast<std::size_t>(g_values.size()));
  return controller_objective<double>(cx, kind, f, g, f_params, g_params, norm, batch);
}

}  // namespace lcl
