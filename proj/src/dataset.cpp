#include "lcl/dataset.hpp"

#include <utility>

#include "lcl/error.hpp"

namespace lcl {

void Dataset::append(Transition t, Provenance p) {
  transitions.push_back(std::move(t));
  provenance.push_back(p);
}

void Dataset::append(const Dataset& other) {
  transitions.insert(transitions.end(), other.transitions.begin(), other.transitions.end());
  provenance.insert(provenance.end(), other.provenance.begin(), other.provenance.end());
}

namespace {

LossBatch pack(const Dataset& data, const Eigen::Index* rows, Eigen::Index count) {
  if (count == 0) throw Error("cannot pack an empty dataset into a batch");
  if (rows) {
    for (Eigen::Index c = 0; c < count; ++c) {
      if (rows[c] < 0 || rows[c] >= data.size()) throw Error("batch row index out of range");
    }
  }
  const auto& first = data.transitions[static_cast<std::size_t>(rows ? rows[0] : 0)];
  const Eigen::Index sdim = first.s.size();
  const Eigen::Index adim = first.tau_run.size();
  const Eigen::Index gdim = first.s_desired.size();

  LossBatch batch;
  batch.s.resize(sdim, count);
  batch.s_desired.resize(gdim, count);
  batch.s_observed.resize(sdim, count);
  batch.tau_run.resize(adim, count);
  for (Eigen::Index c = 0; c < count; ++c) {
    const Eigen::Index r = rows ? rows[c] : c;
    const Transition& t = data.transitions[static_cast<std::size_t>(r)];
    if (t.s.size() != sdim || t.s_next.size() != sdim || t.tau_run.size() != adim ||
        t.s_desired.size() != gdim) {
      throw Error("dataset rows disagree on dimensions");
    }
    batch.s.col(c) = t.s;
    batch.s_desired.col(c) = t.s_desired;
    batch.s_observed.col(c) = t.s_next;
    batch.tau_run.col(c) = t.tau_run;
  }
  return batch;
}

}  // namespace

LossBatch to_batch(const Dataset& data) { return pack(data, nullptr, data.size()); }

LossBatch to_batch(const Dataset& data, const std::vector<Eigen::Index>& rows) {
  return pack(data, rows.data(), static_cast<Eigen::Index>(rows.size()));
}

int TaskSetup::obs_dim() const {
  const int base = observation_dim(plant);
  return traj.space == TaskSpace::kEndEffector ? base + 4 : base;
}

TaskSetup make_task_setup(const PlantSpec& spec, const TrajectorySpec& traj) {
  const int n = spec.dof();
  Eigen::VectorXi task, pos, vel;
  int force = -1;
  switch (traj.space) {
    case TaskSpace::kJoint:
      if (spec.kind == PlantKind::kHopper) {
        throw ConfigError("joint-space tasks are undefined for the hopper");
      }
      task = Eigen::VectorXi::LinSpaced(2 * n, 0, 2 * n - 1);
      pos = Eigen::VectorXi::LinSpaced(n, 0, n - 1);
      vel = Eigen::VectorXi::LinSpaced(n, n, 2 * n - 1);
      break;
    case TaskSpace::kEndEffector:
      if (spec.kind != PlantKind::kArm) {
        throw ConfigError("end-effector tasks need the arm");
      }
      task = Eigen::VectorXi::LinSpaced(4, 2 * n, 2 * n + 3);
      pos = Eigen::VectorXi::LinSpaced(2, 2 * n, 2 * n + 1);
      vel = Eigen::VectorXi::LinSpaced(2, 2 * n + 2, 2 * n + 3);
      break;
    case TaskSpace::kHopperHeight:
      if (spec.kind != PlantKind::kHopper) {
        throw ConfigError("height-profile tasks need the hopper");
      }
      task = Eigen::VectorXi::LinSpaced(3, 0, 2);
      pos = Eigen::VectorXi::Constant(1, 0);
      vel = Eigen::VectorXi::Constant(1, 2);
      force = 1;
      break;
  }
  return TaskSetup{spec, traj, ReferenceTrajectory(traj, spec), task, pos, vel, force};
}

Eigen::VectorXd task_obs(const TaskSetup& setup, const PlantState& state) {
  Eigen::VectorXd base = observe(state, setup.plant);
  if (setup.traj.space != TaskSpace::kEndEffector) return base;

  const EeState ee =
      fk_ee(state.q, state.qd, Eigen::VectorXd::Zero(state.q.size()), setup.plant);
  Eigen::VectorXd out(base.size() + 4);
  out << base, ee.pos, ee.vel;
  return out;
}

Eigen::VectorXd task_desired(const TaskSetup& setup, const PlantState& state, double t_now,
                             const PdGains& gains) {
  const double h = setup.plant.control_period();
  const ReferencePoint ref = setup.ref.at(t_now + h);
  switch (setup.traj.space) {
    case TaskSpace::kJoint: {
      const DesiredNext dn = desired_next(state.q, state.qd, ref, gains, h);
      Eigen::VectorXd out(2 * dn.pos.size());
      out << dn.pos, dn.vel;
      return out;
    }
    case TaskSpace::kEndEffector: {
      const EeState ee =
          fk_ee(state.q, state.qd, Eigen::VectorXd::Zero(state.q.size()), setup.plant);
      const DesiredNext dn = desired_next(ee.pos, ee.vel, ref, gains, h);
      Eigen::VectorXd out(4);
      out << dn.pos, dn.vel;
      return out;
    }
    case TaskSpace::kHopperHeight: {
      const DesiredNext dn = desired_next(state.q, state.qd, ref, gains, h);
      Eigen::VectorXd out(3);
      out << dn.pos[0], ref.force, dn.vel[0];
      return out;
    }
  }
  throw Error("unreachable task space");
}

}  // namespace lcl
