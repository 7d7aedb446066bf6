#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "qcsg/random.hpp"

namespace qcsg {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  bool operator==(const Vec3&) const = default;

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
};

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

/// Unit quaternion (w, x, y, z).
struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
  Vec3 rotate(const Vec3& v) const;
  Vec3 inverse_rotate(const Vec3& v) const;
  bool operator==(const Quaternion&) const = default;

  static Quaternion from_axis_angle(const Vec3& axis, double radians);
};

struct Pose {
  Vec3 translation;
  Quaternion rotation;

  Vec3 to_local(const Vec3& world) const { return rotation.inverse_rotate(world - translation); }
  Vec3 to_world(const Vec3& local) const { return rotation.rotate(local) + translation; }
};

struct Aabb {
  Vec3 lo;
  Vec3 hi;

  bool empty() const { return lo.x > hi.x || lo.y > hi.y || lo.z > hi.z; }
  bool overlaps(const Aabb& o) const {
    return lo.x <= o.hi.x && o.lo.x <= hi.x && lo.y <= o.hi.y && o.lo.y <= hi.y &&
           lo.z <= o.hi.z && o.lo.z <= hi.z;
  }
  Aabb intersect(const Aabb& o) const;
  Aabb unite(const Aabb& o) const;
  double diagonal() const { return (hi - lo).norm(); }
};

struct Sphere {
  double radius;
};
struct Box {
  Vec3 half_extents;
};
/// Axis is the local z axis.
struct Cylinder {
  double radius;
  double half_height;
};

using Shape = std::variant<Sphere, Box, Cylinder>;

enum class PrimitiveKind { Sphere, Box, Cylinder };

std::string to_string(PrimitiveKind kind);

class Primitive {
 public:
  /// Throws Error(Structural) on non-positive dimensions or a non-unit rotation.
  Primitive(std::string id, Shape shape, Pose pose = {});

  static Primitive sphere(std::string id, Vec3 center, double radius);
  static Primitive box(std::string id, Vec3 center, Vec3 half_extents, Quaternion rotation = {});
  static Primitive cylinder(std::string id, Vec3 center, double radius, double half_height,
                            Quaternion rotation = {});

  const std::string& id() const { return id_; }
  PrimitiveKind kind() const;
  const Shape& shape() const { return shape_; }
  const Pose& pose() const { return pose_; }

  double signed_distance(const Vec3& world) const;
  Aabb bounds() const;
  double surface_area() const;
  /// Uniform point on the surface, world coordinates.
  Vec3 sample_surface(Rng& rng) const;

 private:
  std::string id_;
  Shape shape_;
  Pose pose_;
};

/// Negative strictly inside, zero on the surface, positive outside. Exact
/// Euclidean distance outside; inside values are distances to the nearest face.
inline double signed_distance(const Primitive& p, const Vec3& point) {
  return p.signed_distance(point);
}

/// Ordered primitives with unique ids.
class PrimitiveSet {
 public:
  PrimitiveSet() = default;
  explicit PrimitiveSet(std::vector<Primitive> primitives);

  void add(Primitive p);
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const Primitive& operator[](std::size_t i) const { return items_[i]; }
  const std::vector<Primitive>& items() const { return items_; }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

  std::optional<std::size_t> find(const std::string& id) const;
  /// Throws Error(Structural) for unknown ids.
  std::size_t index_of(const std::string& id) const;
  const Primitive& at(const std::string& id) const { return items_[index_of(id)]; }
  std::vector<std::string> ids() const;
  Aabb bounds() const;

 private:
  std::vector<Primitive> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class Membership { Inside, Outside };

class CsgTree {
 public:
  enum class Op { Leaf, Union, Intersection, Complement };

  static CsgTree leaf(std::string primitive_id);
  /// Throws Error(Structural) for fewer than two children.
  static CsgTree unite(std::vector<CsgTree> children);
  static CsgTree intersect(std::vector<CsgTree> children);
  static CsgTree complement(CsgTree child);

  Op op() const { return op_; }
  const std::string& primitive() const { return primitive_; }
  const std::vector<CsgTree>& children() const { return children_; }

  /// Infix rendering: `|` union, `&` intersection, `!` complement.
  std::string to_string() const;
  bool operator==(const CsgTree&) const = default;

 private:
  CsgTree(Op op, std::string primitive, std::vector<CsgTree> children)
      : op_(op), primitive_(std::move(primitive)), children_(std::move(children)) {}

  Op op_;
  std::string primitive_;
  std::vector<CsgTree> children_;
};

std::size_t leaf_count(const CsgTree& tree);

/// Throws Error(Structural) if a leaf id does not resolve in `primitives`.
void validate(const CsgTree& tree, const PrimitiveSet& primitives);

/// Union = min, intersection = max, complement = negation.
double tree_value(const CsgTree& tree, const PrimitiveSet& primitives, const Vec3& point);

/// Zero counts as outside.
Membership tree_membership(const CsgTree& tree, const PrimitiveSet& primitives, const Vec3& point);

/// True when |tree| is a bounded set (a bare top-level complement is not).
bool is_bounded(const CsgTree& tree);

struct CloudPoint {
  Vec3 position;
  std::optional<Vec3> normal;
};

struct PointCloud {
  std::vector<CloudPoint> points;

  bool has_normals() const;
};

/// Nearest-neighbour index over cloud positions.
class PointIndex {
 public:
  explicit PointIndex(std::span<const CloudPoint> points);

  /// Index of the closest point; ties resolve to the lowest index.
  std::size_t nearest(const Vec3& query) const;
  bool empty() const { return order_.empty(); }

 private:
  struct Node {
    std::size_t begin;
    std::size_t end;
    int axis;  // -1 for leaves
    double split;
    std::size_t left;
    std::size_t right;
  };

  std::size_t build(std::size_t begin, std::size_t end);
  void search(std::size_t node, const Vec3& q, std::size_t& best, double& best_d2) const;

  std::vector<Vec3> positions_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

/// Nearest cloud point q with normal n; inside iff (point - q) . n < 0.
/// Throws Error(UnsupportedOracle) when the cloud is empty or lacks normals.
Membership cloud_membership(const PointCloud& cloud, const Vec3& point);

/// Answers inside/outside of the target solid, from a ground-truth tree or an
/// oriented point cloud.
class SolidOracle {
 public:
  static SolidOracle ground_truth(CsgTree tree, PrimitiveSet primitives);
  static SolidOracle cloud(PointCloud cloud);

  Membership classify(const Vec3& point) const;
  /// Unsigned distance to the target surface (nearest-sample distance for clouds).
  double surface_distance(const Vec3& point) const;
  bool is_cloud() const { return cloud_.has_value(); }

 private:
  struct Truth {
    CsgTree tree;
    PrimitiveSet primitives;
  };
  struct Cloud {
    PointCloud cloud;
    PointIndex index;
  };

  std::optional<Truth> truth_;
  std::optional<Cloud> cloud_;
};

/// Rejection sampler over (intersection of `positive`) minus (union of `negative`).
/// Candidates are drawn uniformly from the intersection of the positive
/// bounding boxes; at most 64 * count attempts. May return fewer than `count`.
std::vector<Vec3> sample_region(std::span<const Primitive> positive,
                                std::span<const Primitive> negative, std::size_t count,
                                std::uint64_t seed);

/// Oriented samples on the boundary of |tree|. A point is kept when the tree
/// value is zero and membership flips across it along the normal, which drops
/// interior seams. Throws Error(Structural) for unbounded trees.
PointCloud sample_surface(const CsgTree& tree, const PrimitiveSet& primitives, std::size_t count,
                          std::uint64_t seed);

}  // namespace qcsg
