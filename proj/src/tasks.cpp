#include "lcl/tasks.hpp"

#include <algorithm>
#include <cmath>

#include "lcl/error.hpp"
#include "lcl/rng.hpp"

namespace lcl {

namespace {

// Quintic position polynomial on [0, d] with full boundary conditions. The
// coefficients solve the 3x3 system left after fixing c0..c2; plugging them
// back reproduces the boundary rows exactly.
void quintic_coeffs(double x0, double v0, double a0, double x1, double v1, double a1, double d,
                    double c[6]) {
  const double d1 = x1 - x0 - v0 * d - 0.5 * a0 * d * d;
  const double d2 = v1 - v0 - a0 * d;
  const double d3 = a1 - a0;
  c[0] = x0;
  c[1] = v0;
  c[2] = 0.5 * a0;
  c[3] = (20.0 * d1 - 8.0 * d2 * d + d3 * d * d) / (2.0 * d * d * d);
  c[4] = (-30.0 * d1 + 14.0 * d2 * d - 2.0 * d3 * d * d) / (2.0 * d * d * d * d);
  c[5] = (12.0 * d1 - 6.0 * d2 * d + d3 * d * d) / (2.0 * d * d * d * d * d);
}

}  // namespace

const char* task_space_name(TaskSpace space) {
  switch (space) {
    case TaskSpace::kJoint: return "joint";
    case TaskSpace::kEndEffector: return "end_effector";
    case TaskSpace::kHopperHeight: return "hopper_height";
  }
  return "unknown";
}

TaskSpace task_space_from_name(const std::string& name) {
  if (name == "joint") return TaskSpace::kJoint;
  if (name == "end_effector") return TaskSpace::kEndEffector;
  if (name == "hopper_height") return TaskSpace::kHopperHeight;
  throw ConfigError("unknown task space '" + name + "'");
}

ReferencePoint min_jerk(const Eigen::VectorXd& start, const Eigen::VectorXd& goal,
                        double duration, double t) {
  if (duration <= 0.0) throw ConfigError("min_jerk duration must be positive");
  if (start.size() != goal.size()) throw Error("min_jerk: start/goal size mismatch");

  ReferencePoint ref;
  ref.t = t;
  const double u = std::clamp(t / duration, 0.0, 1.0);
  const double u2 = u * u;
  const double u3 = u2 * u;
  const double shape = 10.0 * u3 - 15.0 * u3 * u + 6.0 * u3 * u2;
  const double dshape = (30.0 * u2 - 60.0 * u3 + 30.0 * u2 * u2) / duration;
  const double ddshape = (60.0 * u - 180.0 * u2 + 120.0 * u3) / (duration * duration);

  // At u = 0 and u = 1 the shape derivatives vanish exactly, so clamping u
  // also pins the endpoint velocities and accelerations to zero.
  const Eigen::VectorXd delta = goal - start;
  ref.pos = start + shape * delta;
  ref.vel = dshape * delta;
  ref.acc = ddshape * delta;
  return ref;
}

DesiredNext desired_next(const Eigen::VectorXd& pos_now, const Eigen::VectorXd& vel_now,
                         const ReferencePoint& ref_next, const PdGains& gains, double h) {
  if (pos_now.size() != ref_next.pos.size() || vel_now.size() != ref_next.pos.size()) {
    throw Error("desired_next: dimension mismatch");
  }
  DesiredNext out;
  out.accel =
      ref_next.acc + gains.kp * (ref_next.pos - pos_now) + gains.kd * (ref_next.vel - vel_now);
  out.vel = vel_now + h * out.accel;
  out.pos = pos_now + h * out.vel;
  return out;
}

HopperProfile HopperProfile::make(double hop_height, double duration, const PlantSpec& spec) {
  if (spec.kind != PlantKind::kHopper) throw ConfigError("hopper profile needs a hopper plant");
  spec.validate();
  if (hop_height <= 0.0) throw ConfigError("hop height must be positive");

  const double m = spec.mass[0];
  const double g = spec.gravity;
  const double k = spec.contact_stiffness;
  const double x_set = -m * g / k;
  const double launch_v = std::sqrt(2.0 * g * hop_height);
  const double t_flight = 2.0 * launch_v / g;

  const double crouch_depth = 0.05;
  const double x_crouch = x_set - crouch_depth;
  const double t_rest = 0.15;
  const double t_crouch = 0.35;
  const double t_thrust = std::clamp((0.0 - x_crouch) / (0.45 * launch_v), 0.08, 0.6);

  // Landing mirrors launch: the absorption segment is the time-reversed
  // thrust quintic, so it inherits the thrust's feasibility, followed by a
  // slow recovery back to the spring equilibrium.
  const double used = t_rest + t_crouch + t_thrust + t_flight + t_thrust + t_crouch;
  if (used > duration - 0.05) {
    throw ConfigError("hopper profile does not fit the trajectory duration");
  }

  HopperProfile profile;
  profile.duration_ = duration;
  profile.hop_height_ = hop_height;
  profile.mass_ = m;
  profile.gravity_ = g;

  const auto add_const = [&](double t0, double t1, double x) {
    Segment seg;
    seg.t0 = t0;
    seg.t1 = t1;
    seg.c[0] = x;
    seg.in_contact = true;
    profile.segments_.push_back(seg);
  };
  const auto add_quintic = [&](double t0, double t1, double x0, double v0, double a0, double x1,
                               double v1, double a1, bool contact) {
    Segment seg;
    seg.t0 = t0;
    seg.t1 = t1;
    quintic_coeffs(x0, v0, a0, x1, v1, a1, t1 - t0, seg.c);
    seg.in_contact = contact;
    profile.segments_.push_back(seg);
  };

  double t = 0.0;
  add_const(t, t + t_rest, x_set);
  t += t_rest;
  add_quintic(t, t + t_crouch, x_set, 0.0, 0.0, x_crouch, 0.0, 0.0, true);
  t += t_crouch;
  add_quintic(t, t + t_thrust, x_crouch, 0.0, 0.0, 0.0, launch_v, -g, true);
  t += t_thrust;
  {
    Segment seg;  // ballistic arc: x = v t - g t^2 / 2
    seg.t0 = t;
    seg.t1 = t + t_flight;
    seg.c[1] = launch_v;
    seg.c[2] = -0.5 * g;
    seg.in_contact = false;
    profile.segments_.push_back(seg);
  }
  t += t_flight;
  add_quintic(t, t + t_thrust, 0.0, -launch_v, -g, x_crouch, 0.0, 0.0, true);
  t += t_thrust;
  add_quintic(t, t + t_crouch, x_crouch, 0.0, 0.0, x_set, 0.0, 0.0, true);
  t += t_crouch;
  add_const(t, duration, x_set);

  // Feasibility sweep: the reference ground reaction must not pull, and the
  // actuator force needed against the spring must stay within the limit.
  double peak = 0.0;
  for (double tc = 0.0; tc <= duration; tc += 1e-3) {
    const ReferencePoint p = profile.at(tc);
    if (p.in_contact) {
      const double f_ref = m * (p.acc[0] + g);
      if (f_ref < -1e-6) {
        throw ConfigError("hopper profile demands adhesive ground contact");
      }
    }
    const double f_spring = hopper_contact_force(p.pos[0], p.vel[0], spec);
    const double tau = m * p.acc[0] + m * g - f_spring;
    peak = std::max(peak, std::abs(tau));
  }
  if (peak > spec.torque_limit[0]) {
    throw ConfigError("hop height infeasible: profile needs |force| " + std::to_string(peak) +
                      " against an actuator limit of " + std::to_string(spec.torque_limit[0]));
  }
  profile.peak_actuator_ = peak;
  return profile;
}

ReferencePoint HopperProfile::eval_segment(const Segment& seg, double t) const {
  const double dt = t - seg.t0;
  const double* c = seg.c;
  double pos = 0.0, vel = 0.0, acc = 0.0;
  // Horner evaluation of the polynomial and its derivatives.
  for (int p = 5; p >= 0; --p) pos = pos * dt + c[p];
  for (int p = 5; p >= 1; --p) vel = vel * dt + p * c[p];
  for (int p = 5; p >= 2; --p) acc = acc * dt + p * (p - 1) * c[p];

  ReferencePoint ref;
  ref.t = t;
  ref.pos = Eigen::VectorXd::Constant(1, pos);
  ref.vel = Eigen::VectorXd::Constant(1, vel);
  ref.acc = Eigen::VectorXd::Constant(1, acc);
  ref.in_contact = seg.in_contact;
  ref.force = seg.in_contact ? std::max(0.0, mass_ * (acc + gravity_)) : 0.0;
  return ref;
}

ReferencePoint HopperProfile::at(double t) const {
  const double tc = std::clamp(t, 0.0, duration_);
  for (const Segment& seg : segments_) {
    if (tc <= seg.t1 || &seg == &segments_.back()) return eval_segment(seg, tc);
  }
  return eval_segment(segments_.back(), tc);
}

TrajectorySpec make_target(const PlantSpec& spec, TaskSpace space, int target_id,
                           double duration) {
  if (target_id < 0) throw ConfigError("target id must be non-negative");
  Rng rng(mix_seed(0x7461736b00ull, (static_cast<std::uint64_t>(spec.kind) << 20) ^
                                        (static_cast<std::uint64_t>(space) << 16) ^
                                        static_cast<std::uint64_t>(target_id)));
  TrajectorySpec traj;
  traj.space = space;
  traj.duration = duration;

  switch (spec.kind) {
    case PlantKind::kPendulum: {
      if (space != TaskSpace::kJoint) throw ConfigError("pendulum supports joint-space tasks");
      traj.start_q = Eigen::VectorXd::Zero(1);
      traj.goal = Eigen::VectorXd::Constant(1, rng.sign() * rng.uniform(0.8, 2.4));
      break;
    }
    case PlantKind::kArm: {
      const int n = spec.dof();
      if (space == TaskSpace::kJoint) {
        traj.start_q = Eigen::VectorXd::Zero(n);
        traj.start_q[0] = -M_PI / 2.0;  // hanging straight down
        traj.goal = traj.start_q;
        for (int i = 0; i < n; ++i) traj.goal[i] += rng.sign() * rng.uniform(0.4, 1.2);
      } else if (space == TaskSpace::kEndEffector) {
        traj.start_q = Eigen::VectorXd::Zero(n);
        traj.start_q[0] = 1.2;
        traj.start_q[1] = -0.8;
        if (n > 2) traj.start_q[2] = -0.5;
        const double reach = spec.length.sum();
        const double r = rng.uniform(0.35, 0.8) * reach;
        const double psi = rng.uniform(-0.9, 0.9);
        traj.goal = Eigen::Vector2d(r * std::cos(psi), r * std::sin(psi));
      } else {
        throw ConfigError("arm supports joint or end-effector tasks");
      }
      break;
    }
    case PlantKind::kHopper: {
      if (space != TaskSpace::kHopperHeight) throw ConfigError("hopper supports height tasks");
      traj.start_q = Eigen::VectorXd::Constant(
          1, -spec.mass[0] * spec.gravity / spec.contact_stiffness);
      traj.goal = Eigen::VectorXd::Constant(1, rng.uniform(0.02, 0.06));
      break;
    }
  }
  return traj;
}

ReferenceTrajectory::ReferenceTrajectory(const TrajectorySpec& traj, const PlantSpec& spec)
    : traj_(traj) {
  switch (traj.space) {
    case TaskSpace::kJoint:
      start_pos_ = traj.start_q;
      break;
    case TaskSpace::kEndEffector:
      start_pos_ = fk_ee_pos(traj.start_q, spec);
      break;
    case TaskSpace::kHopperHeight:
      profile_.push_back(HopperProfile::make(traj.goal[0], traj.duration, spec));
      break;
  }
}

ReferencePoint ReferenceTrajectory::at(double t) const {
  if (!profile_.empty()) return profile_.front().at(t);
  return min_jerk(start_pos_, traj_.goal, traj_.duration, t);
}

int ReferenceTrajectory::task_dim() const {
  switch (traj_.space) {
    case TaskSpace::kJoint: return static_cast<int>(traj_.start_q.size());
    case TaskSpace::kEndEffector: return 2;
    case TaskSpace::kHopperHeight: return 1;
  }
  return 0;
}

}  // namespace lcl
