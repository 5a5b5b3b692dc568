#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace grasplearn {

enum class ObjectShape { kCube, kCylinder, kPolyhedron };

inline const char* to_string(ObjectShape s) {
  switch (s) {
    case ObjectShape::kCube: return "cube";
    case ObjectShape::kCylinder: return "cylinder";
    case ObjectShape::kPolyhedron: return "polyhedron";
  }
  return "?";
}

/// Result of a nearest-surface query in the object's local frame.
struct SurfacePoint {
  double signed_distance = 0.0;              // negative inside
  Eigen::Vector3d point{Eigen::Vector3d::Zero()};   // on the surface
  Eigen::Vector3d outward_normal{Eigen::Vector3d::UnitZ()};
};

namespace detail {

/// Closest point on triangle (a, b, c) to p. Ericson, Real-Time Collision
/// Detection, 5.1.5.
inline Eigen::Vector3d closest_point_on_triangle(const Eigen::Vector3d& p,
                                                 const Eigen::Vector3d& a,
                                                 const Eigen::Vector3d& b,
                                                 const Eigen::Vector3d& c) {
  const Eigen::Vector3d ab = b - a;
  const Eigen::Vector3d ac = c - a;
  const Eigen::Vector3d ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Eigen::Vector3d bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return a + v * ab;
  }

  const Eigen::Vector3d cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return a + w * ac;
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return b + w * (c - b);
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return a + ab * v + ac * w;
}

inline double sign_or_one(double x) { return x < 0.0 ? -1.0 : 1.0; }

}  // namespace detail

/// One graspable object: shape plus its scaled dimensions. The local frame
/// sits at the center of mass. Cube and cylinder rest axis-aligned; the
/// octahedron rests face-down via resting_orientation().
class ObjectGeometry {
 public:
  ObjectGeometry(ObjectShape shape, double base_size, double scale)
      : shape_(shape), size_(base_size * scale) {
    if (!(base_size > 0.0) || !(scale > 0.0)) {
      throw std::invalid_argument("object dimensions must be positive");
    }
  }

  ObjectShape shape() const { return shape_; }

  /// Scaled characteristic size (cube side; cylinder height; octahedron
  /// diameter along an axis).
  double size() const { return size_; }

  /// Center-of-mass height above the table when resting.
  double resting_height() const {
    switch (shape_) {
      case ObjectShape::kCube: return size_ / 2.0;
      case ObjectShape::kCylinder: return size_ / 2.0;
      case ObjectShape::kPolyhedron: return (size_ / 2.0) / std::sqrt(3.0);
    }
    return 0.0;
  }

  /// Radius of the circumscribed sphere; used as the grasp-quality
  /// normalization moment arm.
  double circumscribed_radius() const {
    const double h = size_ / 2.0;
    switch (shape_) {
      case ObjectShape::kCube: return h * std::sqrt(3.0);
      case ObjectShape::kCylinder: return std::sqrt(h * h + h * h);
      case ObjectShape::kPolyhedron: return h;
    }
    return h;
  }

  /// Body orientation in which the shape rests stably on the table.
  Eigen::Quaterniond resting_orientation() const {
    if (shape_ == ObjectShape::kPolyhedron) {
      const Eigen::Vector3d face_normal =
          Eigen::Vector3d(1.0, 1.0, 1.0).normalized();
      return Eigen::Quaterniond::FromTwoVectors(face_normal,
                                                -Eigen::Vector3d::UnitZ());
    }
    return Eigen::Quaterniond::Identity();
  }

  /// Nearest surface point to a query point, both in the local frame.
  SurfacePoint nearest_surface(const Eigen::Vector3d& p) const {
    switch (shape_) {
      case ObjectShape::kCube: return nearest_on_box(p);
      case ObjectShape::kCylinder: return nearest_on_cylinder(p);
      case ObjectShape::kPolyhedron: return nearest_on_octahedron(p);
    }
    throw std::invalid_argument("unknown shape");
  }

 private:
  SurfacePoint nearest_on_box(const Eigen::Vector3d& p) const {
    const double h = size_ / 2.0;
    SurfacePoint out;
    const Eigen::Vector3d q = p.cwiseMax(-h).cwiseMin(h);
    if ((p - q).squaredNorm() > 0.0) {
      out.point = q;
      out.signed_distance = (p - q).norm();
      out.outward_normal = (p - q) / out.signed_distance;
      return out;
    }
    // Inside: pop out through the closest face.
    int axis = 0;
    double best_gap = h - std::abs(p.x());
    for (int i = 1; i < 3; ++i) {
      const double gap = h - std::abs(p[i]);
      if (gap < best_gap) {
        best_gap = gap;
        axis = i;
      }
    }
    const double s = detail::sign_or_one(p[axis]);
    out.point = p;
    out.point[axis] = s * h;
    out.signed_distance = -best_gap;
    out.outward_normal = s * Eigen::Vector3d::Unit(axis);
    return out;
  }

  SurfacePoint nearest_on_cylinder(const Eigen::Vector3d& p) const {
    const double r = size_ / 2.0;
    const double hh = size_ / 2.0;
    const double rho = std::hypot(p.x(), p.y());
    const double dr = rho - r;
    const double dz = std::abs(p.z()) - hh;
    const double zs = detail::sign_or_one(p.z());
    const Eigen::Vector3d radial =
        rho > 1e-12 ? Eigen::Vector3d(p.x() / rho, p.y() / rho, 0.0)
                    : Eigen::Vector3d::UnitX();
    SurfacePoint out;
    if (dr > 0.0 && dz > 0.0) {
      out.point = Eigen::Vector3d(radial.x() * r, radial.y() * r, zs * hh);
      out.signed_distance = std::hypot(dr, dz);
      out.outward_normal = (p - out.point) / out.signed_distance;
    } else if (dr > 0.0) {
      out.point = Eigen::Vector3d(radial.x() * r, radial.y() * r, p.z());
      out.signed_distance = dr;
      out.outward_normal = radial;
    } else if (dz > 0.0) {
      out.point = Eigen::Vector3d(p.x(), p.y(), zs * hh);
      out.signed_distance = dz;
      out.outward_normal = Eigen::Vector3d(0.0, 0.0, zs);
    } else if (dr >= dz) {  // inside, wall is closer (or tie)
      out.point = Eigen::Vector3d(radial.x() * r, radial.y() * r, p.z());
      out.signed_distance = dr;
      out.outward_normal = radial;
    } else {  // inside, cap is closer
      out.point = Eigen::Vector3d(p.x(), p.y(), zs * hh);
      out.signed_distance = dz;
      out.outward_normal = Eigen::Vector3d(0.0, 0.0, zs);
    }
    return out;
  }

  SurfacePoint nearest_on_octahedron(const Eigen::Vector3d& p) const {
    const double radius = size_ / 2.0;  // vertices on the axes
    const double l1 = std::abs(p.x()) + std::abs(p.y()) + std::abs(p.z());
    SurfacePoint out;
    if (l1 <= radius) {
      // Interior: project onto the face plane of the containing octant.
      const Eigen::Vector3d n =
          Eigen::Vector3d(detail::sign_or_one(p.x()),
                          detail::sign_or_one(p.y()),
                          detail::sign_or_one(p.z())) /
          std::sqrt(3.0);
      const double offset = radius / std::sqrt(3.0);
      const double plane_dist = offset - n.dot(p);
      out.point = p + n * plane_dist;
      out.signed_distance = -plane_dist;
      out.outward_normal = n;
      return out;
    }
    double best = std::numeric_limits<double>::infinity();
    Eigen::Vector3d best_cp = Eigen::Vector3d::Zero();
    Eigen::Vector3d best_n = Eigen::Vector3d::UnitZ();
    for (int sx = -1; sx <= 1; sx += 2) {
      for (int sy = -1; sy <= 1; sy += 2) {
        for (int sz = -1; sz <= 1; sz += 2) {
          const Eigen::Vector3d a(sx * radius, 0.0, 0.0);
          const Eigen::Vector3d b(0.0, sy * radius, 0.0);
          const Eigen::Vector3d c(0.0, 0.0, sz * radius);
          const Eigen::Vector3d cp =
              detail::closest_point_on_triangle(p, a, b, c);
          const double d = (p - cp).norm();
          if (d < best) {
            best = d;
            best_cp = cp;
            best_n = Eigen::Vector3d(sx, sy, sz).normalized();
          }
        }
      }
    }
    out.point = best_cp;
    out.signed_distance = best;
    out.outward_normal =
        best > 1e-12 ? Eigen::Vector3d((p - best_cp) / best) : best_n;
    return out;
  }

  ObjectShape shape_;
  double size_;
};

}  // namespace grasplearn
