#pragma once

#include <iosfwd>
#include <vector>

#include "geomphase/linalg.hpp"
#include "geomphase/propagator.hpp"

namespace geomphase {

/// A point on the unit sphere.
struct BlochPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 1.0;

  Eigen::Vector3d vec() const { return {x, y, z}; }
};

/// (2 Re(c0* c1), 2 Im(c0* c1), |c0|^2 - |c1|^2). Throws DimensionMismatch
/// unless the state has two components.
BlochPoint to_bloch(const StateVector& state);
BlochPoint to_bloch(const CVector& state);

/// Geodesic (great-circle) distance.
double geodesic_distance(const BlochPoint& a, const BlochPoint& b);

class BlochPath {
 public:
  static constexpr double kClosureTolerance = 1e-6;
  static constexpr double kUnitTolerance = 1e-10;

  /// `params` holds the curve parameter of each point (s for evolution
  /// paths). Throws InvalidArgument for fewer than two points, mismatched
  /// sizes, points off the unit sphere, or neighbours pi/2 or more apart.
  BlochPath(std::vector<BlochPoint> points, std::vector<double> params);

  std::size_t size() const { return points_.size(); }
  const std::vector<BlochPoint>& points() const { return points_; }
  const std::vector<double>& params() const { return params_; }
  const BlochPoint& operator[](std::size_t k) const { return points_[k]; }
  /// Endpoint gap <= 1e-6.
  bool closed() const { return closed_; }

  BlochPath reversed() const;

 private:
  std::vector<BlochPoint> points_;
  std::vector<double> params_;
  bool closed_ = false;
};

/// Maps every sample of a two-level path to the sphere.
BlochPath bloch_path(const SampledPath& path);

enum class Closure { AlreadyClosed, GeodesicClose };
enum class ReferencePole { North, South };

struct SolidAngle {
  double omega = 0.0;  ///< signed, accumulated; measured from the north pole
  ReferencePole reference = ReferencePole::North;
  bool pole_proximity = false;  ///< some sample within 1e-8 of a pole
};

inline constexpr double kPoleProximity = 1e-8;

/// Omega = integral of (1 - cos Theta) dPhi along the path, each segment
/// taken as a great-circle arc, optionally closed by the geodesic from the
/// last point back to the first. Windings accumulate (no reduction mod 4 pi).
/// Throws InvalidArgument for fewer than 3 points, NotClosed when
/// AlreadyClosed is requested for an open path, and AntipodalEndpoints when
/// the closing geodesic is undefined.
SolidAngle solid_angle(const BlochPath& path, Closure closure);

/// Transverse intersections between non-adjacent great-circle segments.
/// Throws TooCoarse if any segment is longer than 0.5 rad.
std::size_t count_self_crossings(const BlochPath& path);

inline constexpr double kMaxCrossingSegment = 0.5;
inline constexpr double kCrossingTolerance = 1e-9;

/// Omega - 2 a1mag2 omega0 T. Throws InvalidArgument unless a1mag2 in [0, 1].
double corrected_solid_angle(double omega, double a1mag2, double omega0, double T);

/// wrap(-omega / 2).
double gp_from_solid_angle(double omega);

struct SolidAngleReport {
  double omega = 0.0;
  std::size_t crossings = 0;
  double omega_corrected = 0.0;
  double gp_predicted = 0.0;  ///< wrap(-omega / 2)
  double gp_corrected = 0.0;  ///< wrap(-omega_corrected / 2)
  ReferencePole reference = ReferencePole::North;
  bool pole_proximity = false;
};

SolidAngleReport analyze_bloch_path(const BlochPath& path, Closure closure, double a1mag2,
                                    double omega0, double T);

/// CSV "s,x,y,z" with 17 significant digits.
void write_bloch_csv(std::ostream& out, const BlochPath& path);

}  // namespace geomphase
