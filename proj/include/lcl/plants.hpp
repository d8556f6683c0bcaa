#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

namespace lcl {

enum class PlantKind : std::uint8_t { kPendulum, kArm, kHopper };

const char* plant_kind_name(PlantKind kind);
PlantKind plant_kind_from_name(const std::string& name);

// Rigid-body toy plants integrated with semi-implicit Euler at dt; the
// controller acts every `substeps` integrator steps (zero-order hold).
//
// pendulum: m l^2 th'' = tau - m g l sin(th) - b th', th = 0 hanging down.
// arm:      planar n-link chain with point masses at the distal end of each
//           link, M(q) q'' + c(q, q') + g(q) + b q' = tau.
// hopper:   vertical point mass on a thruster, m x'' = tau + f_c - m g - b x'
//           with penalty ground contact f_c = max(0, -k x - c x') for x < 0.
struct PlantSpec {
  PlantKind kind = PlantKind::kPendulum;
  Eigen::VectorXd mass;
  Eigen::VectorXd length;   // unused by the hopper
  Eigen::VectorXd damping;  // viscous, per degree of freedom
  Eigen::VectorXd torque_limit;
  double gravity = 9.81;
  double contact_stiffness = 0.0;  // hopper only
  double contact_damping = 0.0;    // hopper only
  double dt = 1e-3;
  int substeps = 10;

  int dof() const { return static_cast<int>(mass.size()); }
  double control_period() const { return dt * substeps; }
  void validate() const;
};

PlantSpec default_pendulum();
PlantSpec default_arm(int links);
PlantSpec default_hopper();

struct PlantState {
  Eigen::VectorXd q;
  Eigen::VectorXd qd;
};

// Rest configuration: pendulum and arm hang at q = 0; the hopper sits at the
// static spring equilibrium x = -m g / k.
PlantState rest_state(const PlantSpec& spec);

// One integrator substep. Torque is taken as-is; actuation limits are the
// controller's job. Throws NumericError on non-finite state or torque.
PlantState pendulum_step(const PlantState& state, double tau, const PlantSpec& spec);
PlantState arm_step(const PlantState& state, const Eigen::VectorXd& tau, const PlantSpec& spec);
PlantState hopper_step(const PlantState& state, double tau, const PlantSpec& spec);
PlantState plant_step(const PlantState& state, const Eigen::VectorXd& tau, const PlantSpec& spec);

// Observation layouts: pendulum [th, th'], arm [q, q'], hopper [x, f_c, x'].
Eigen::VectorXd observe(const PlantState& state, const PlantSpec& spec);
int observation_dim(const PlantSpec& spec);

double hopper_contact_force(double x, double xd, const PlantSpec& spec);

// Arm dynamics pieces, exposed for tests and feedforward computations.
Eigen::MatrixXd arm_mass_matrix(const Eigen::VectorXd& q, const PlantSpec& spec);
Eigen::VectorXd arm_gravity(const Eigen::VectorXd& q, const PlantSpec& spec);
Eigen::VectorXd arm_coriolis(const Eigen::VectorXd& q, const Eigen::VectorXd& qd,
                             const PlantSpec& spec);
Eigen::VectorXd arm_accel(const Eigen::VectorXd& q, const Eigen::VectorXd& qd,
                          const Eigen::VectorXd& tau, const PlantSpec& spec);

// Planar end-effector kinematics of the arm tip.
struct EeState {
  Eigen::Vector2d pos;
  Eigen::Vector2d vel;
  Eigen::Vector2d acc;
};
Eigen::Vector2d fk_ee_pos(const Eigen::VectorXd& q, const PlantSpec& spec);
Eigen::MatrixXd ee_jacobian(const Eigen::VectorXd& q, const PlantSpec& spec);
EeState fk_ee(const Eigen::VectorXd& q, const Eigen::VectorXd& qd, const Eigen::VectorXd& qdd,
              const PlantSpec& spec);

}  // namespace lcl
