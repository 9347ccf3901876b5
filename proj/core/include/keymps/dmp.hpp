#pragma once

// Discrete Dynamic Movement Primitives: a critically damped point attractor
// shaped by a phase-driven forcing term of Gaussian basis functions.
//
//   tau * dz = alpha_z * (beta_z * (goal - y) - z) + f(s)
//   tau * dy = z
//   tau * ds = -alpha_s * s
//   f(s)     = s * sum_i w_i psi_i(s) / sum_i psi_i(s),  psi_i = exp(-h_i (s - c_i)^2)

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace keymps {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using WeightMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3>;

struct DmpGains {
  double alpha_z = 25.0;
  double beta_z = 6.25;
  double alpha_s = 3.0;
  double tau = 1.0;  // seconds

  // beta_z = alpha_z / 4.
  static DmpGains critically_damped(double alpha_z, double alpha_s, double tau);

  void validate() const;
};

struct BasisSet {
  std::vector<double> centers;  // strictly decreasing, in (0, 1]
  std::vector<double> widths;

  std::size_t count() const noexcept { return centers.size(); }
  double activation(std::size_t i, double s) const;
  void validate() const;
};

struct Primitive {
  std::string keyword;
  std::string description;
  DmpGains gains;
  BasisSet basis;
  WeightMatrix weights;  // basis.count() x 3, columns are the local x, y, z axes
  Vec3 demo_start = Vec3::Zero();
  Vec3 demo_goal = Vec3::Zero();

  void validate() const;
};

struct Trajectory {
  double dt = 0.0;  // seconds between consecutive points
  std::vector<Vec3> points;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
  double duration() const noexcept;
  void validate() const;
};

// Start and goal of one sequenced DMP, meters.
struct ScalingParams {
  Vec3 y0 = Vec3::Zero();
  Vec3 y_goal = Vec3::Zero();
};

// Centers exp(-alpha_s * i / (count - 1)), widths count^1.5 / c_i^2.
BasisSet make_basis(int count, double alpha_s, double tau);

// Forcing term of the primitive's own (unscaled) demo frame.
Vec3 forcing(const Primitive& primitive, double s);

// Locally weighted regression of the forcing term from one demonstration.
// gains.tau is replaced by the demo duration. The demo is taken to be in the
// primitive's local frame: x along the motion, y across it, z vertical.
Primitive learn_from_demo(const Trajectory& demo, const DmpGains& gains, int basis_count,
                          std::string keyword);

struct RolloutOptions {
  std::optional<double> tau_override;
  // Integration length in multiples of tau. 1.0 integrates ceil(tau / dt) steps.
  double horizon = 1.0;
};

// RK4 integration from scaling.y0 (exactly the first sample) toward
// scaling.y_goal. The forcing term is rescaled per local axis by the ratio of
// new to demonstrated amplitude and rotated about z to follow the pair's
// planar direction.
Trajectory rollout(const Primitive& primitive, const ScalingParams& scaling, double dt,
                   const RolloutOptions& options);
Trajectory rollout(const Primitive& primitive, const ScalingParams& scaling, double dt,
                   std::optional<double> tau_override = std::nullopt);

// Per-axis factor applied to the forcing term; 1 on axes whose demo amplitude
// is below 1e-6 m.
Vec3 amplitude_factors(const Primitive& primitive, const Vec3& local_displacement);

// Heading change about z applied at rollout; 0 when the pair has no planar extent.
double alignment_yaw(const Primitive& primitive, const ScalingParams& scaling);

}  // namespace keymps
