#include "keymps/dmp.hpp"

#include <cmath>
#include <numeric>

#include "keymps/error.hpp"

namespace keymps {
namespace {

constexpr double kNormalizerEpsilon = 1e-10;
constexpr double kRegressionEpsilon = 1e-8;
constexpr double kAmplitudeGuard = 1e-6;

bool finite(const Vec3& v) { return v.allFinite(); }

// Central differences in the interior, one-sided at both ends.
std::vector<Vec3> gradient(const std::vector<Vec3>& values, double dt) {
  const std::size_t n = values.size();
  std::vector<Vec3> out(n);
  out.front() = (values[1] - values[0]) / dt;
  out.back() = (values[n - 1] - values[n - 2]) / dt;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    out[i] = (values[i + 1] - values[i - 1]) / (2.0 * dt);
  }
  return out;
}

Vec3 rotate_z(const Vec3& v, double c, double s) {
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y(), v.z()};
}

struct State {
  Vec3 y;
  Vec3 z;
  double s;
};

}  // namespace

DmpGains DmpGains::critically_damped(double alpha_z, double alpha_s, double tau) {
  DmpGains g;
  g.alpha_z = alpha_z;
  g.beta_z = alpha_z / 4.0;
  g.alpha_s = alpha_s;
  g.tau = tau;
  return g;
}

void DmpGains::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(alpha_z) || !positive(beta_z) || !positive(alpha_s) || !positive(tau)) {
    throw Error(ErrorCode::InvalidArgument, "DMP gains and tau must be positive and finite");
  }
}

double BasisSet::activation(std::size_t i, double s) const {
  const double d = s - centers[i];
  return std::exp(-widths[i] * d * d);
}

void BasisSet::validate() const {
  if (centers.empty() || centers.size() != widths.size()) {
    throw Error(ErrorCode::InvalidArgument, "basis centers and widths must be non-empty and equal length");
  }
  for (std::size_t i = 0; i < centers.size(); ++i) {
    if (!(centers[i] > 0.0 && centers[i] <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "basis center outside (0, 1]");
    }
    if (i > 0 && !(centers[i] < centers[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "basis centers must be strictly decreasing");
    }
    if (!(std::isfinite(widths[i]) && widths[i] > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "basis widths must be positive and finite");
    }
  }
}

void Primitive::validate() const {
  gains.validate();
  basis.validate();
  if (weights.rows() != static_cast<Eigen::Index>(basis.count())) {
    throw Error(ErrorCode::InvalidArgument,
                "primitive '" + keyword + "': weight rows do not match basis count");
  }
  if (!weights.allFinite() || !finite(demo_start) || !finite(demo_goal)) {
    throw Error(ErrorCode::InvalidArgument, "primitive '" + keyword + "' has non-finite parameters");
  }
}

double Trajectory::duration() const noexcept {
  return points.empty() ? 0.0 : dt * static_cast<double>(points.size() - 1);
}

void Trajectory::validate() const {
  if (!(std::isfinite(dt) && dt > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "trajectory dt must be positive");
  }
  if (points.empty()) throw Error(ErrorCode::InvalidArgument, "trajectory has no points");
  for (const auto& p : points) {
    if (!finite(p)) throw Error(ErrorCode::InvalidArgument, "trajectory has non-finite points");
  }
}

BasisSet make_basis(int count, double alpha_s, double tau) {
  if (count < 2) {
    throw Error(ErrorCode::InvalidBasisCount, "need at least 2 basis functions, got " + std::to_string(count));
  }
  if (!(alpha_s > 0.0) || !(tau > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha_s and tau must be positive");
  }
  BasisSet basis;
  basis.centers.resize(count);
  basis.widths.resize(count);
  const double scale = std::pow(static_cast<double>(count), 1.5);
  for (int i = 0; i < count; ++i) {
    const double c = std::exp(-alpha_s * static_cast<double>(i) / static_cast<double>(count - 1));
    basis.centers[i] = c;
    basis.widths[i] = scale / (c * c);
  }
  return basis;
}

Vec3 forcing(const Primitive& primitive, double s) {
  const auto& basis = primitive.basis;
  Vec3 weighted = Vec3::Zero();
  double normalizer = 0.0;
  for (std::size_t i = 0; i < basis.count(); ++i) {
    const double psi = basis.activation(i, s);
    weighted += psi * primitive.weights.row(static_cast<Eigen::Index>(i)).transpose();
    normalizer += psi;
  }
  return weighted * s / (normalizer + kNormalizerEpsilon);
}

Primitive learn_from_demo(const Trajectory& demo, const DmpGains& gains, int basis_count,
                          std::string keyword) {
  if (demo.points.size() < 3) {
    throw Error(ErrorCode::DemoTooShort,
                "demo needs at least 3 points, got " + std::to_string(demo.points.size()));
  }
  demo.validate();

  Primitive p;
  p.keyword = std::move(keyword);
  p.gains = gains;
  p.gains.tau = demo.duration();
  p.gains.validate();
  p.basis = make_basis(basis_count, p.gains.alpha_s, p.gains.tau);
  p.demo_start = demo.points.front();
  p.demo_goal = demo.points.back();

  const double tau = p.gains.tau;
  const auto velocity = gradient(demo.points, demo.dt);
  const auto acceleration = gradient(velocity, demo.dt);

  const std::size_t n = demo.points.size();
  const std::size_t nb = p.basis.count();
  WeightMatrix numerator = WeightMatrix::Zero(static_cast<Eigen::Index>(nb), 3);
  std::vector<double> denominator(nb, 0.0);

  for (std::size_t t = 0; t < n; ++t) {
    const Vec3 z = tau * velocity[t];
    const Vec3 zdot = tau * acceleration[t];
    const Vec3 target = tau * zdot - p.gains.alpha_z * (p.gains.beta_z * (p.demo_goal - demo.points[t]) - z);
    if (!finite(target)) {
      throw Error(ErrorCode::DegenerateDemo, "non-finite derivative at sample " + std::to_string(t),
                  {.index = t});
    }
    const double s = std::exp(-p.gains.alpha_s * static_cast<double>(t) * demo.dt / tau);
    for (std::size_t i = 0; i < nb; ++i) {
      const double psi = p.basis.activation(i, s);
      numerator.row(static_cast<Eigen::Index>(i)) += (psi * s) * target.transpose();
      denominator[i] += psi * s * s;
    }
  }

  p.weights.resize(static_cast<Eigen::Index>(nb), 3);
  for (std::size_t i = 0; i < nb; ++i) {
    p.weights.row(static_cast<Eigen::Index>(i)) =
        numerator.row(static_cast<Eigen::Index>(i)) / (denominator[i] + kRegressionEpsilon);
  }
  if (!p.weights.allFinite()) {
    throw Error(ErrorCode::DegenerateDemo, "regression produced non-finite weights");
  }
  return p;
}

Vec3 amplitude_factors(const Primitive& primitive, const Vec3& local_displacement) {
  const Vec3 demo_amplitude = primitive.demo_goal - primitive.demo_start;
  Vec3 factors;
  for (int d = 0; d < 3; ++d) {
    factors[d] = std::abs(demo_amplitude[d]) < kAmplitudeGuard ? 1.0 : local_displacement[d] / demo_amplitude[d];
  }
  return factors;
}

double alignment_yaw(const Primitive& primitive, const ScalingParams& scaling) {
  const Vec2 planar = (scaling.y_goal - scaling.y0).head<2>();
  if (planar.norm() < kAmplitudeGuard) return 0.0;
  const Vec2 demo_planar = (primitive.demo_goal - primitive.demo_start).head<2>();
  const double demo_yaw = demo_planar.norm() < kAmplitudeGuard ? 0.0 : std::atan2(demo_planar.y(), demo_planar.x());
  return std::atan2(planar.y(), planar.x()) - demo_yaw;
}

Trajectory rollout(const Primitive& primitive, const ScalingParams& scaling, double dt,
                   std::optional<double> tau_override) {
  RolloutOptions options;
  options.tau_override = tau_override;
  return rollout(primitive, scaling, dt, options);
}

Trajectory rollout(const Primitive& primitive, const ScalingParams& scaling, double dt,
                   const RolloutOptions& options) {
  primitive.validate();
  if (!finite(scaling.y0) || !finite(scaling.y_goal)) {
    throw Error(ErrorCode::InvalidArgument, "scaling parameters must be finite");
  }
  const double tau = options.tau_override.value_or(primitive.gains.tau);
  if (!(std::isfinite(tau) && tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau must be positive");
  if (!(std::isfinite(dt) && dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  if (dt > tau / 20.0) {
    throw Error(ErrorCode::StepTooCoarse, "dt " + std::to_string(dt) + " exceeds tau/20 = " + std::to_string(tau / 20.0));
  }
  if (!(options.horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");

  const auto& g = primitive.gains;
  const double yaw = alignment_yaw(primitive, scaling);
  const double cy = std::cos(yaw);
  const double sy = std::sin(yaw);

  // Integrate the offset from y0 in the primitive's local frame.
  const Vec3 goal = rotate_z(scaling.y_goal - scaling.y0, cy, -sy);
  const Vec3 factors = amplitude_factors(primitive, goal);

  auto derivative = [&](const State& x) {
    const Vec3 f = factors.cwiseProduct(forcing(primitive, x.s));
    return State{x.z / tau, (g.alpha_z * (g.beta_z * (goal - x.y) - x.z) + f) / tau, -g.alpha_s * x.s / tau};
  };
  auto advance = [](const State& x, const State& k, double h) {
    return State{x.y + h * k.y, x.z + h * k.z, x.s + h * k.s};
  };

  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(options.horizon * tau / dt - 1e-9)));
  Trajectory out;
  out.dt = dt;
  out.points.reserve(steps + 1);
  out.points.push_back(scaling.y0);

  State x{Vec3::Zero(), Vec3::Zero(), 1.0};
  for (std::size_t i = 0; i < steps; ++i) {
    const State k1 = derivative(x);
    const State k2 = derivative(advance(x, k1, dt / 2.0));
    const State k3 = derivative(advance(x, k2, dt / 2.0));
    const State k4 = derivative(advance(x, k3, dt));
    x.y += dt / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
    x.z += dt / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z);
    x.s += dt / 6.0 * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s);
    if (!finite(x.y) || !finite(x.z) || !std::isfinite(x.s)) {
      throw Error(ErrorCode::NumericalDivergence, "state diverged at step " + std::to_string(i + 1),
                  {.index = i + 1});
    }
    out.points.push_back(scaling.y0 + rotate_z(x.y, cy, sy));
  }
  return out;
}

}  // namespace keymps
