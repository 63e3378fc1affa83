#include "geomphase/bloch.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "geomphase/error.hpp"
#include "geomphase/phase.hpp"

namespace geomphase {

namespace {

using Eigen::Vector3d;

// Signed area of the geodesic triangle (p, a, b), all unit vectors.
double triangle_area(const Vector3d& p, const Vector3d& a, const Vector3d& b) {
  const double num = p.dot(a.cross(b));
  const double den = 1.0 + p.dot(a) + a.dot(b) + b.dot(p);
  return 2.0 * std::atan2(num, den);
}

double azimuth_step(const Vector3d& a, const Vector3d& b) {
  double d = std::atan2(b.y(), b.x()) - std::atan2(a.y(), a.x());
  if (d > kPi) d -= kTwoPi;
  if (d <= -kPi) d += kTwoPi;
  return d;
}

// Segment contribution to int (1 - cos Theta) dPhi along the arc a -> b.
double segment_omega(const Vector3d& a, const Vector3d& b, ReferencePole reference) {
  if (reference == ReferencePole::North) {
    return triangle_area(Vector3d::UnitZ(), a, b);
  }
  return triangle_area(-Vector3d::UnitZ(), a, b) + 2.0 * azimuth_step(a, b);
}

int orientation(double value) {
  if (value > kCrossingTolerance) return 1;
  if (value < -kCrossingTolerance) return -1;
  return 0;
}

bool arcs_cross(const Vector3d& a, const Vector3d& b, const Vector3d& c, const Vector3d& d) {
  const Vector3d n1 = a.cross(b);
  const Vector3d n2 = c.cross(d);
  const int sc = orientation(n1.dot(c));
  const int sd = orientation(n1.dot(d));
  const int sa = orientation(n2.dot(a));
  const int sb = orientation(n2.dot(b));
  if (sc == 0 || sd == 0 || sa == 0 || sb == 0) return false;
  if (sc == sd || sa == sb) return false;
  // the two great circles meet twice; require the arcs to be on the same side
  return (a + b).dot(c + d) > 0.0;
}

}  // namespace

BlochPoint to_bloch(const CVector& state) {
  if (state.size() != 2) {
    throw Error(ErrorCode::DimensionMismatch, "Bloch mapping needs a two-level state");
  }
  const Complex c = std::conj(state(0)) * state(1);
  return {2.0 * c.real(), 2.0 * c.imag(), std::norm(state(0)) - std::norm(state(1))};
}

BlochPoint to_bloch(const StateVector& state) { return to_bloch(state.amplitudes()); }

double geodesic_distance(const BlochPoint& a, const BlochPoint& b) {
  const Vector3d u = a.vec();
  const Vector3d v = b.vec();
  return std::atan2(u.cross(v).norm(), u.dot(v));
}

BlochPath::BlochPath(std::vector<BlochPoint> points, std::vector<double> params)
    : points_(std::move(points)), params_(std::move(params)) {
  if (points_.size() < 2 || params_.size() != points_.size()) {
    throw Error(ErrorCode::InvalidArgument, "Bloch path needs >= 2 points with matching parameters");
  }
  for (std::size_t k = 0; k < points_.size(); ++k) {
    if (std::abs(points_[k].vec().norm() - 1.0) > kUnitTolerance) {
      throw Error(ErrorCode::InvalidArgument, "point " + std::to_string(k) + " is off the unit sphere");
    }
    if (k > 0 && geodesic_distance(points_[k - 1], points_[k]) >= kPi / 2.0) {
      throw Error(ErrorCode::InvalidArgument,
                  "points " + std::to_string(k - 1) + " and " + std::to_string(k) + " are too far apart");
    }
  }
  closed_ = geodesic_distance(points_.front(), points_.back()) <= kClosureTolerance;
}

BlochPath BlochPath::reversed() const {
  return BlochPath(std::vector<BlochPoint>(points_.rbegin(), points_.rend()),
                   std::vector<double>(params_.rbegin(), params_.rend()));
}

BlochPath bloch_path(const SampledPath& path) {
  std::vector<BlochPoint> points;
  points.reserve(path.size());
  for (Eigen::Index k = 0; k < path.states().cols(); ++k) {
    // re-normalise so accumulated integrator rounding cannot trip the unit check
    points.push_back(to_bloch(CVector(path.states().col(k).normalized())));
  }
  return BlochPath(std::move(points), path.grid());
}

SolidAngle solid_angle(const BlochPath& path, Closure closure) {
  if (path.size() < 3) {
    throw Error(ErrorCode::InvalidArgument, "solid angle needs at least 3 points");
  }
  if (closure == Closure::AlreadyClosed && !path.closed()) {
    throw Error(ErrorCode::NotClosed, "path endpoints differ by more than 1e-6");
  }
  const auto& pts = path.points();
  const Vector3d first = pts.front().vec();
  const Vector3d last = pts.back().vec();
  if (closure == Closure::GeodesicClose && (first + last).norm() < 1e-8) {
    throw Error(ErrorCode::AntipodalEndpoints, "closing geodesic between antipodal endpoints");
  }

  SolidAngle result;
  Vector3d centroid = Vector3d::Zero();
  for (const auto& p : pts) {
    centroid += p.vec();
    if ((p.vec() - Vector3d::UnitZ()).norm() < kPoleProximity ||
        (p.vec() + Vector3d::UnitZ()).norm() < kPoleProximity) {
      result.pole_proximity = true;
    }
  }
  // the pole the curve stays away from keeps every triangle well-conditioned
  result.reference = centroid.z() > 0.0 ? ReferencePole::South : ReferencePole::North;

  double omega = 0.0;
  double comp = 0.0;
  auto add = [&](double x) {
    const double y = x - comp;
    const double t = omega + y;
    comp = (t - omega) - y;
    omega = t;
  };
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    add(segment_omega(pts[k].vec(), pts[k + 1].vec(), result.reference));
  }
  if (closure == Closure::GeodesicClose) {
    add(segment_omega(last, first, result.reference));
  }
  result.omega = omega;
  return result;
}

std::size_t count_self_crossings(const BlochPath& path) {
  const auto& pts = path.points();
  const std::size_t segments = pts.size() - 1;
  std::vector<Vector3d> v(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) v[k] = pts[k].vec();
  for (std::size_t k = 0; k < segments; ++k) {
    if (geodesic_distance(pts[k], pts[k + 1]) > kMaxCrossingSegment) {
      throw Error(ErrorCode::TooCoarse, "segment " + std::to_string(k) + " is longer than 0.5 rad");
    }
  }
  std::size_t count = 0;
  for (std::size_t i = 0; i < segments; ++i) {
    for (std::size_t j = i + 2; j < segments; ++j) {
      // on a closed path the last segment touches the first
      if (path.closed() && i == 0 && j + 1 == segments) continue;
      if (arcs_cross(v[i], v[i + 1], v[j], v[j + 1])) ++count;
    }
  }
  return count;
}

double corrected_solid_angle(double omega, double a1mag2, double omega0, double T) {
  if (!(a1mag2 >= 0.0 && a1mag2 <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "|a1|^2 must lie in [0, 1]");
  }
  return omega - 2.0 * a1mag2 * omega0 * T;
}

double gp_from_solid_angle(double omega) { return wrap_phase(-omega / 2.0); }

SolidAngleReport analyze_bloch_path(const BlochPath& path, Closure closure, double a1mag2,
                                    double omega0, double T) {
  const SolidAngle sa = solid_angle(path, closure);
  SolidAngleReport r;
  r.omega = sa.omega;
  r.reference = sa.reference;
  r.pole_proximity = sa.pole_proximity;
  r.crossings = count_self_crossings(path);
  r.omega_corrected = corrected_solid_angle(sa.omega, a1mag2, omega0, T);
  r.gp_predicted = gp_from_solid_angle(r.omega);
  r.gp_corrected = gp_from_solid_angle(r.omega_corrected);
  return r;
}

void write_bloch_csv(std::ostream& out, const BlochPath& path) {
  out << "s,x,y,z\n" << std::setprecision(17);
  for (std::size_t k = 0; k < path.size(); ++k) {
    const auto& p = path[k];
    out << path.params()[k] << ',' << p.x << ',' << p.y << ',' << p.z << '\n';
  }
}

}  // namespace geomphase
