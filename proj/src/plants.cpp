#include "lcl/plants.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "lcl/error.hpp"

namespace lcl {

namespace {

void check_finite(const PlantState& state, const Eigen::VectorXd& tau) {
  if (!state.q.allFinite() || !state.qd.allFinite()) {
    throw NumericError("plant step: non-finite state");
  }
  if (!tau.allFinite()) throw NumericError("plant step: non-finite torque");
}

// Absolute link angles and their accumulated sines/cosines.
struct ArmFrames {
  Eigen::VectorXd phi, c, s;
};

ArmFrames arm_frames(const Eigen::VectorXd& q) {
  ArmFrames f;
  const Eigen::Index n = q.size();
  f.phi.resize(n);
  f.c.resize(n);
  f.s.resize(n);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    acc += q[j];
    f.phi[j] = acc;
    f.c[j] = std::cos(acc);
    f.s[j] = std::sin(acc);
  }
  return f;
}

// Jacobian of point mass i (tip of link i): column k = sum_{j=k..i} l_j *
// [-sin phi_j; cos phi_j] for k <= i, zero otherwise.
Eigen::MatrixXd point_jacobian(const ArmFrames& f, const Eigen::VectorXd& length, int i) {
  const Eigen::Index n = length.size();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2, n);
  Eigen::Vector2d acc = Eigen::Vector2d::Zero();
  for (int j = i; j >= 0; --j) {
    acc[0] += -length[j] * f.s[j];
    acc[1] += length[j] * f.c[j];
    jac.col(j) = acc;
  }
  return jac;
}

// Time derivative of point_jacobian: column k = sum_{j=k..i} l_j phidot_j *
// [-cos phi_j; -sin phi_j].
Eigen::MatrixXd point_jacobian_dot(const ArmFrames& f, const Eigen::VectorXd& length,
                                   const Eigen::VectorXd& qd, int i) {
  const Eigen::Index n = length.size();
  Eigen::MatrixXd jdot = Eigen::MatrixXd::Zero(2, n);
  Eigen::Vector2d acc = Eigen::Vector2d::Zero();
  for (int j = i; j >= 0; --j) {
    double phidot = 0.0;
    for (int k = 0; k <= j; ++k) phidot += qd[k];
    acc[0] += -length[j] * phidot * f.c[j];
    acc[1] += -length[j] * phidot * f.s[j];
    jdot.col(j) = acc;
  }
  return jdot;
}

}  // namespace

const char* plant_kind_name(PlantKind kind) {
  switch (kind) {
    case PlantKind::kPendulum: return "pendulum";
    case PlantKind::kArm: return "arm";
    case PlantKind::kHopper: return "hopper";
  }
  return "unknown";
}

PlantKind plant_kind_from_name(const std::string& name) {
  if (name == "pendulum") return PlantKind::kPendulum;
  if (name == "arm") return PlantKind::kArm;
  if (name == "hopper") return PlantKind::kHopper;
  throw ConfigError("unknown plant '" + name + "' (expected pendulum, arm or hopper)");
}

void PlantSpec::validate() const {
  if (mass.size() == 0) throw ConfigError("plant needs at least one mass");
  if ((mass.array() <= 0).any()) throw ConfigError("masses must be positive");
  if (kind != PlantKind::kHopper) {
    if (length.size() != mass.size()) throw ConfigError("length count must match mass count");
    if ((length.array() <= 0).any()) throw ConfigError("lengths must be positive");
  }
  if (kind != PlantKind::kArm && mass.size() != 1) {
    throw ConfigError("pendulum and hopper have a single degree of freedom");
  }
  if (damping.size() != mass.size()) throw ConfigError("damping count must match dof");
  if ((damping.array() < 0).any()) throw ConfigError("damping must be non-negative");
  if (torque_limit.size() != mass.size()) throw ConfigError("torque limit count must match dof");
  if ((torque_limit.array() <= 0).any()) throw ConfigError("torque limits must be positive");
  if (dt <= 0) throw ConfigError("dt must be positive");
  if (substeps <= 0) throw ConfigError("substeps must be positive");
  if (kind == PlantKind::kHopper && (contact_stiffness <= 0 || contact_damping < 0)) {
    throw ConfigError("hopper needs positive contact stiffness and non-negative contact damping");
  }
}

PlantSpec default_pendulum() {
  PlantSpec spec;
  spec.kind = PlantKind::kPendulum;
  spec.mass = Eigen::VectorXd::Constant(1, 1.0);
  spec.length = Eigen::VectorXd::Constant(1, 1.0);
  spec.damping = Eigen::VectorXd::Constant(1, 0.05);
  spec.torque_limit = Eigen::VectorXd::Constant(1, 15.0);
  return spec;
}

PlantSpec default_arm(int links) {
  if (links < 2 || links > 3) throw ConfigError("arm defaults cover 2 or 3 links");
  PlantSpec spec;
  spec.kind = PlantKind::kArm;
  if (links == 2) {
    spec.mass = Eigen::Vector2d(1.0, 0.7);
    spec.length = Eigen::Vector2d(1.0, 0.8);
    spec.damping = Eigen::Vector2d(0.3, 0.2);
    spec.torque_limit = Eigen::Vector2d(40.0, 25.0);
  } else {
    spec.mass = Eigen::Vector3d(1.0, 0.7, 0.5);
    spec.length = Eigen::Vector3d(1.0, 0.8, 0.6);
    spec.damping = Eigen::Vector3d(0.3, 0.2, 0.1);
    spec.torque_limit = Eigen::Vector3d(60.0, 35.0, 20.0);
  }
  return spec;
}

PlantSpec default_hopper() {
  PlantSpec spec;
  spec.kind = PlantKind::kHopper;
  spec.mass = Eigen::VectorXd::Constant(1, 2.0);
  spec.length = Eigen::VectorXd();
  spec.damping = Eigen::VectorXd::Constant(1, 0.5);
  spec.torque_limit = Eigen::VectorXd::Constant(1, 60.0);
  spec.contact_stiffness = 400.0;
  spec.contact_damping = 15.0;
  return spec;
}

PlantState rest_state(const PlantSpec& spec) {
  PlantState state;
  state.q = Eigen::VectorXd::Zero(spec.dof());
  state.qd = Eigen::VectorXd::Zero(spec.dof());
  if (spec.kind == PlantKind::kHopper) {
    state.q[0] = -spec.mass[0] * spec.gravity / spec.contact_stiffness;
  }
  return state;
}

PlantState pendulum_step(const PlantState& state, double tau, const PlantSpec& spec) {
  check_finite(state, Eigen::VectorXd::Constant(1, tau));
  const double m = spec.mass[0];
  const double l = spec.length[0];
  const double qdd =
      (tau - m * spec.gravity * l * std::sin(state.q[0]) - spec.damping[0] * state.qd[0]) /
      (m * l * l);
  PlantState next;
  next.qd = Eigen::VectorXd::Constant(1, state.qd[0] + spec.dt * qdd);
  next.q = Eigen::VectorXd::Constant(1, state.q[0] + spec.dt * next.qd[0]);
  return next;
}

Eigen::MatrixXd arm_mass_matrix(const Eigen::VectorXd& q, const PlantSpec& spec) {
  const ArmFrames f = arm_frames(q);
  const Eigen::Index n = q.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXd jac = point_jacobian(f, spec.length, i);
    m.noalias() += spec.mass[i] * jac.transpose() * jac;
  }
  return m;
}

Eigen::VectorXd arm_gravity(const Eigen::VectorXd& q, const PlantSpec& spec) {
  // G_k = dV/dq_k with V = g * sum_i m_i * y_i; the y-row of each Jacobian.
  const ArmFrames f = arm_frames(q);
  const Eigen::Index n = q.size();
  Eigen::VectorXd grav = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXd jac = point_jacobian(f, spec.length, i);
    grav.noalias() += spec.gravity * spec.mass[i] * jac.row(1).transpose();
  }
  return grav;
}

Eigen::VectorXd arm_coriolis(const Eigen::VectorXd& q, const Eigen::VectorXd& qd,
                             const PlantSpec& spec) {
  const ArmFrames f = arm_frames(q);
  const Eigen::Index n = q.size();
  Eigen::VectorXd cor = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXd jac = point_jacobian(f, spec.length, i);
    const Eigen::MatrixXd jdot = point_jacobian_dot(f, spec.length, qd, i);
    cor.noalias() += spec.mass[i] * jac.transpose() * (jdot * qd);
  }
  return cor;
}

Eigen::VectorXd arm_accel(const Eigen::VectorXd& q, const Eigen::VectorXd& qd,
                          const Eigen::VectorXd& tau, const PlantSpec& spec) {
  const Eigen::VectorXd rhs = tau - arm_coriolis(q, qd, spec) - arm_gravity(q, spec) -
                              spec.damping.cwiseProduct(qd);
  return arm_mass_matrix(q, spec).llt().solve(rhs);
}

PlantState arm_step(const PlantState& state, const Eigen::VectorXd& tau, const PlantSpec& spec) {
  check_finite(state, tau);
  const Eigen::VectorXd qdd = arm_accel(state.q, state.qd, tau, spec);
  PlantState next;
  next.qd = state.qd + spec.dt * qdd;
  next.q = state.q + spec.dt * next.qd;
  return next;
}

double hopper_contact_force(double x, double xd, const PlantSpec& spec) {
  if (x >= 0.0) return 0.0;
  const double f = spec.contact_stiffness * (-x) - spec.contact_damping * xd;
  return f > 0.0 ? f : 0.0;
}

PlantState hopper_step(const PlantState& state, double tau, const PlantSpec& spec) {
  check_finite(state, Eigen::VectorXd::Constant(1, tau));
  const double m = spec.mass[0];
  const double f_c = hopper_contact_force(state.q[0], state.qd[0], spec);
  const double qdd =
      (tau + f_c - spec.damping[0] * state.qd[0]) / m - spec.gravity;
  PlantState next;
  next.qd = Eigen::VectorXd::Constant(1, state.qd[0] + spec.dt * qdd);
  next.q = Eigen::VectorXd::Constant(1, state.q[0] + spec.dt * next.qd[0]);
  return next;
}

PlantState plant_step(const PlantState& state, const Eigen::VectorXd& tau, const PlantSpec& spec) {
  if (tau.size() != spec.dof()) throw Error("plant_step: torque size mismatch");
  switch (spec.kind) {
    case PlantKind::kPendulum: return pendulum_step(state, tau[0], spec);
    case PlantKind::kArm: return arm_step(state, tau, spec);
    case PlantKind::kHopper: return hopper_step(state, tau[0], spec);
  }
  throw Error("plant_step: unknown plant kind");
}

Eigen::VectorXd observe(const PlantState& state, const PlantSpec& spec) {
  if (spec.kind == PlantKind::kHopper) {
    Eigen::VectorXd obs(3);
    obs << state.q[0], hopper_contact_force(state.q[0], state.qd[0], spec), state.qd[0];
    return obs;
  }
  Eigen::VectorXd obs(2 * spec.dof());
  obs << state.q, state.qd;
  return obs;
}

int observation_dim(const PlantSpec& spec) {
  return spec.kind == PlantKind::kHopper ? 3 : 2 * spec.dof();
}

Eigen::Vector2d fk_ee_pos(const Eigen::VectorXd& q, const PlantSpec& spec) {
  const ArmFrames f = arm_frames(q);
  Eigen::Vector2d pos = Eigen::Vector2d::Zero();
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    pos[0] += spec.length[j] * f.c[j];
    pos[1] += spec.length[j] * f.s[j];
  }
  return pos;
}

Eigen::MatrixXd ee_jacobian(const Eigen::VectorXd& q, const PlantSpec& spec) {
  const ArmFrames f = arm_frames(q);
  return point_jacobian(f, spec.length, static_cast<int>(q.size()) - 1);
}

EeState fk_ee(const Eigen::VectorXd& q, const Eigen::VectorXd& qd, const Eigen::VectorXd& qdd,
              const PlantSpec& spec) {
  const ArmFrames f = arm_frames(q);
  const int tip = static_cast<int>(q.size()) - 1;
  const Eigen::MatrixXd jac = point_jacobian(f, spec.length, tip);
  const Eigen::MatrixXd jdot = point_jacobian_dot(f, spec.length, qd, tip);
  EeState ee;
  ee.pos = fk_ee_pos(q, spec);
  ee.vel = jac * qd;
  ee.acc = jac * qdd + jdot * qd;
  return ee;
}

}  // namespace lcl
