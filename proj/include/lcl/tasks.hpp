#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lcl/plants.hpp"

namespace lcl {

enum class TaskSpace : std::uint8_t { kJoint, kEndEffector, kHopperHeight };

const char* task_space_name(TaskSpace space);
TaskSpace task_space_from_name(const std::string& name);

// One sample of a reference trajectory in task coordinates: joint targets for
// joint-space tasks, the planar tip point for end-effector tasks, body height
// for the hopper. force/in_contact are only meaningful for the hopper.
struct ReferencePoint {
  double t = 0.0;
  Eigen::VectorXd pos;
  Eigen::VectorXd vel;
  Eigen::VectorXd acc;
  double force = 0.0;
  bool in_contact = false;
};

// Minimum-jerk point-to-point trajectory: s(u) = 10u^3 - 15u^4 + 6u^5 between
// start and goal over `duration`, clamped to the endpoints outside [0, T].
ReferencePoint min_jerk(const Eigen::VectorXd& start, const Eigen::VectorXd& goal,
                        double duration, double t);

struct PdGains {
  double kp = 10.0;
  double kd = 6.324555320336759;  // 2 sqrt(kp), critical damping
};

// Desired next sample: PD-corrected reference acceleration integrated one
// control period ahead with the same semi-implicit rule the plants use.
//   accel = ref.acc + kp (ref.pos - pos) + kd (ref.vel - vel)
//   vel*  = vel + h accel,  pos* = pos + h vel*
struct DesiredNext {
  Eigen::VectorXd accel;
  Eigen::VectorXd pos;
  Eigen::VectorXd vel;
};

DesiredNext desired_next(const Eigen::VectorXd& pos_now, const Eigen::VectorXd& vel_now,
                         const ReferencePoint& ref_next, const PdGains& gains, double h);

// Hop cycle for the 1-D hopper: rest, min-jerk crouch, quintic thrust that
// launches at sqrt(2 g H), ballistic flight, quintic absorption back to the
// spring equilibrium, rest. The reference contact force is the profile's
// ground reaction m (x'' + g) during stance and zero in flight. Construction
// fails when the actuator cannot realize the profile against the ground
// spring or the duration cannot fit the cycle.
class HopperProfile {
 public:
  static HopperProfile make(double hop_height, double duration, const PlantSpec& spec);

  ReferencePoint at(double t) const;
  double duration() const { return duration_; }
  double hop_height() const { return hop_height_; }

  // Largest |actuator force| the profile demands; always <= the spec limit.
  double peak_actuator_force() const { return peak_actuator_; }

 private:
  struct Segment {
    double t0 = 0.0, t1 = 0.0;
    // position polynomial coefficients, evaluated on (t - t0)
    double c[6] = {0, 0, 0, 0, 0, 0};
    bool in_contact = true;
  };

  ReferencePoint eval_segment(const Segment& seg, double t) const;

  std::vector<Segment> segments_;
  double duration_ = 0.0;
  double hop_height_ = 0.0;
  double mass_ = 0.0;
  double gravity_ = 0.0;
  double peak_actuator_ = 0.0;
};

// Start configuration plus goal in task coordinates.
struct TrajectorySpec {
  TaskSpace space = TaskSpace::kJoint;
  Eigen::VectorXd start_q;  // plant configuration at t = 0
  Eigen::VectorXd goal;     // joint target, EE point, or {hop height}
  double duration = 1.5;
};

// Deterministic target family: the same (plant kind, space, target_id) always
// yields the same trajectory, independent of the experiment seed.
TrajectorySpec make_target(const PlantSpec& spec, TaskSpace space, int target_id,
                           double duration);

// Uniform sampling interface over the three reference kinds. Stateless per
// sample apart from the precomputed hopper profile.
class ReferenceTrajectory {
 public:
  ReferenceTrajectory(const TrajectorySpec& traj, const PlantSpec& spec);

  ReferencePoint at(double t) const;
  const TrajectorySpec& spec() const { return traj_; }
  int task_dim() const;  // position dims of the task space

 private:
  TrajectorySpec traj_;
  Eigen::VectorXd start_pos_;  // task-space start
  std::vector<HopperProfile> profile_;  // empty unless hopper
};

}  // namespace lcl
