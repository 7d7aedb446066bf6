#include "qcsg/geometry.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numbers>
#include <set>

#include "qcsg/error.hpp"

namespace qcsg {

namespace {

constexpr double kUnitTolerance = 1e-9;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double max3(double a, double b, double c) { return std::max(a, std::max(b, c)); }

double box_sdf(const Vec3& p, const Vec3& h) {
  const Vec3 q{std::abs(p.x) - h.x, std::abs(p.y) - h.y, std::abs(p.z) - h.z};
  const Vec3 outside{std::max(q.x, 0.0), std::max(q.y, 0.0), std::max(q.z, 0.0)};
  return outside.norm() + std::min(max3(q.x, q.y, q.z), 0.0);
}

double cylinder_sdf(const Vec3& p, double radius, double half_height) {
  const double dr = std::hypot(p.x, p.y) - radius;
  const double dz = std::abs(p.z) - half_height;
  return std::hypot(std::max(dr, 0.0), std::max(dz, 0.0)) + std::min(std::max(dr, dz), 0.0);
}

Vec3 local_half_extents(const Shape& shape) {
  return std::visit(Overloaded{
                        [](const Sphere& s) { return Vec3{s.radius, s.radius, s.radius}; },
                        [](const Box& b) { return b.half_extents; },
                        [](const Cylinder& c) { return Vec3{c.radius, c.radius, c.half_height}; },
                    },
                    shape);
}

double gaussian(Rng& rng) {
  // Box-Muller; u1 in (0,1].
  const double u1 = 1.0 - rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

struct TreeEval {
  double value;
  const Primitive* active;
  double sign;  // +1 if the active leaf enters with an even number of complements
};

TreeEval evaluate(const CsgTree& tree, const PrimitiveSet& primitives, const Vec3& point) {
  switch (tree.op()) {
    case CsgTree::Op::Leaf: {
      const Primitive& p = primitives.at(tree.primitive());
      return {p.signed_distance(point), &p, 1.0};
    }
    case CsgTree::Op::Complement: {
      TreeEval e = evaluate(tree.children().front(), primitives, point);
      return {-e.value, e.active, -e.sign};
    }
    case CsgTree::Op::Union:
    case CsgTree::Op::Intersection: {
      const bool is_union = tree.op() == CsgTree::Op::Union;
      TreeEval best = evaluate(tree.children().front(), primitives, point);
      for (std::size_t i = 1; i < tree.children().size(); ++i) {
        TreeEval e = evaluate(tree.children()[i], primitives, point);
        if (is_union ? e.value < best.value : e.value > best.value) best = e;
      }
      return best;
    }
  }
  return {0.0, nullptr, 1.0};
}

// {bounded, complement bounded}
std::pair<bool, bool> boundedness(const CsgTree& tree) {
  switch (tree.op()) {
    case CsgTree::Op::Leaf:
      return {true, false};
    case CsgTree::Op::Complement: {
      auto [b, cb] = boundedness(tree.children().front());
      return {cb, b};
    }
    case CsgTree::Op::Union: {
      bool all = true, any_co = false;
      for (const auto& c : tree.children()) {
        auto [b, cb] = boundedness(c);
        all = all && b;
        any_co = any_co || cb;
      }
      return {all, any_co};
    }
    case CsgTree::Op::Intersection: {
      bool any = false, all_co = true;
      for (const auto& c : tree.children()) {
        auto [b, cb] = boundedness(c);
        any = any || b;
        all_co = all_co && cb;
      }
      return {any, all_co};
    }
  }
  return {false, false};
}

void collect_leaves(const CsgTree& tree, std::set<std::string>& out) {
  if (tree.op() == CsgTree::Op::Leaf) {
    out.insert(tree.primitive());
    return;
  }
  for (const auto& c : tree.children()) collect_leaves(c, out);
}

Vec3 gradient(const Primitive& p, const Vec3& x, double h) {
  const Vec3 ex{h, 0, 0}, ey{0, h, 0}, ez{0, 0, h};
  return Vec3{p.signed_distance(x + ex) - p.signed_distance(x - ex),
              p.signed_distance(x + ey) - p.signed_distance(x - ey),
              p.signed_distance(x + ez) - p.signed_distance(x - ez)} *
         (0.5 / h);
}

}  // namespace

Vec3 Quaternion::rotate(const Vec3& v) const {
  // v' = v + 2w (u x v) + 2 u x (u x v)
  const Vec3 u{x, y, z};
  const Vec3 t = cross(u, v) * 2.0;
  return v + t * w + cross(u, t);
}

Vec3 Quaternion::inverse_rotate(const Vec3& v) const {
  return Quaternion{w, -x, -y, -z}.rotate(v);
}

Quaternion Quaternion::from_axis_angle(const Vec3& axis, double radians) {
  const Vec3 a = axis * (1.0 / axis.norm());
  const double s = std::sin(radians / 2);
  return {std::cos(radians / 2), a.x * s, a.y * s, a.z * s};
}

Aabb Aabb::intersect(const Aabb& o) const {
  return {{std::max(lo.x, o.lo.x), std::max(lo.y, o.lo.y), std::max(lo.z, o.lo.z)},
          {std::min(hi.x, o.hi.x), std::min(hi.y, o.hi.y), std::min(hi.z, o.hi.z)}};
}

Aabb Aabb::unite(const Aabb& o) const {
  return {{std::min(lo.x, o.lo.x), std::min(lo.y, o.lo.y), std::min(lo.z, o.lo.z)},
          {std::max(hi.x, o.hi.x), std::max(hi.y, o.hi.y), std::max(hi.z, o.hi.z)}};
}

std::string to_string(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::Sphere:
      return "sphere";
    case PrimitiveKind::Box:
      return "box";
    case PrimitiveKind::Cylinder:
      return "cylinder";
  }
  return "unknown";
}

Primitive::Primitive(std::string id, Shape shape, Pose pose)
    : id_(std::move(id)), shape_(shape), pose_(pose) {
  if (id_.empty()) throw Error(ErrorKind::Structural, "primitive id must not be empty");
  const Vec3 h = local_half_extents(shape_);
  if (!(h.x > 0 && h.y > 0 && h.z > 0) || !std::isfinite(h.x + h.y + h.z)) {
    throw Error(ErrorKind::Structural, "primitive '" + id_ + "': dimensions must be positive");
  }
  if (std::abs(pose_.rotation.norm() - 1.0) > kUnitTolerance) {
    throw Error(ErrorKind::Structural, "primitive '" + id_ + "': rotation is not a unit quaternion");
  }
}

Primitive Primitive::sphere(std::string id, Vec3 center, double radius) {
  return Primitive(std::move(id), Sphere{radius}, Pose{center, {}});
}

Primitive Primitive::box(std::string id, Vec3 center, Vec3 half_extents, Quaternion rotation) {
  return Primitive(std::move(id), Box{half_extents}, Pose{center, rotation});
}

Primitive Primitive::cylinder(std::string id, Vec3 center, double radius, double half_height,
                              Quaternion rotation) {
  return Primitive(std::move(id), Cylinder{radius, half_height}, Pose{center, rotation});
}

PrimitiveKind Primitive::kind() const {
  return static_cast<PrimitiveKind>(shape_.index());
}

double Primitive::signed_distance(const Vec3& world) const {
  const Vec3 p = pose_.to_local(world);
  return std::visit(Overloaded{
                        [&](const Sphere& s) { return p.norm() - s.radius; },
                        [&](const Box& b) { return box_sdf(p, b.half_extents); },
                        [&](const Cylinder& c) { return cylinder_sdf(p, c.radius, c.half_height); },
                    },
                    shape_);
}

Aabb Primitive::bounds() const {
  const Vec3 h = local_half_extents(shape_);
  if (kind() == PrimitiveKind::Sphere) {
    return {pose_.translation - h, pose_.translation + h};
  }
  Aabb box{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()},
           {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()}};
  for (int corner = 0; corner < 8; ++corner) {
    const Vec3 c{(corner & 1) ? h.x : -h.x, (corner & 2) ? h.y : -h.y, (corner & 4) ? h.z : -h.z};
    const Vec3 w = pose_.to_world(c);
    box = box.unite(Aabb{w, w});
  }
  return box;
}

double Primitive::surface_area() const {
  using std::numbers::pi;
  return std::visit(Overloaded{
                        [](const Sphere& s) { return 4.0 * pi * s.radius * s.radius; },
                        [](const Box& b) {
                          const Vec3& h = b.half_extents;
                          return 8.0 * (h.x * h.y + h.y * h.z + h.x * h.z);
                        },
                        [](const Cylinder& c) {
                          return 4.0 * pi * c.radius * c.half_height +
                                 2.0 * pi * c.radius * c.radius;
                        },
                    },
                    shape_);
}

Vec3 Primitive::sample_surface(Rng& rng) const {
  using std::numbers::pi;
  const Vec3 local = std::visit(
      Overloaded{
          [&](const Sphere& s) {
            Vec3 d;
            do {
              d = {gaussian(rng), gaussian(rng), gaussian(rng)};
            } while (d.norm() < 1e-12);
            return d * (s.radius / d.norm());
          },
          [&](const Box& b) {
            const Vec3& h = b.half_extents;
            const std::array<double, 3> face_area{h.y * h.z, h.x * h.z, h.x * h.y};
            const double total = face_area[0] + face_area[1] + face_area[2];
            double pick = rng.uniform() * total;
            int axis = 0;
            while (axis < 2 && pick >= face_area[axis]) pick -= face_area[axis++];
            const double side = rng.uniform() < 0.5 ? -1.0 : 1.0;
            Vec3 p{rng.uniform(-h.x, h.x), rng.uniform(-h.y, h.y), rng.uniform(-h.z, h.z)};
            if (axis == 0) p.x = side * h.x;
            if (axis == 1) p.y = side * h.y;
            if (axis == 2) p.z = side * h.z;
            return p;
          },
          [&](const Cylinder& c) {
            const double side = 4.0 * pi * c.radius * c.half_height;
            const double caps = 2.0 * pi * c.radius * c.radius;
            const double theta = 2.0 * pi * rng.uniform();
            if (rng.uniform() * (side + caps) < side) {
              return Vec3{c.radius * std::cos(theta), c.radius * std::sin(theta),
                          rng.uniform(-c.half_height, c.half_height)};
            }
            const double r = c.radius * std::sqrt(rng.uniform());
            const double z = rng.uniform() < 0.5 ? -c.half_height : c.half_height;
            return Vec3{r * std::cos(theta), r * std::sin(theta), z};
          },
      },
      shape_);
  return pose_.to_world(local);
}

PrimitiveSet::PrimitiveSet(std::vector<Primitive> primitives) {
  for (auto& p : primitives) add(std::move(p));
}

void PrimitiveSet::add(Primitive p) {
  if (index_.contains(p.id())) {
    throw Error(ErrorKind::Structural, "duplicate primitive id '" + p.id() + "'");
  }
  index_.emplace(p.id(), items_.size());
  items_.push_back(std::move(p));
}

std::optional<std::size_t> PrimitiveSet::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t PrimitiveSet::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(ErrorKind::Structural, "unknown primitive id '" + id + "'");
  return it->second;
}

std::vector<std::string> PrimitiveSet::ids() const {
  std::vector<std::string> out;
  out.reserve(items_.size());
  for (const auto& p : items_) out.push_back(p.id());
  return out;
}

Aabb PrimitiveSet::bounds() const {
  if (items_.empty()) return {{0, 0, 0}, {0, 0, 0}};
  Aabb box = items_.front().bounds();
  for (const auto& p : items_) box = box.unite(p.bounds());
  return box;
}

CsgTree CsgTree::leaf(std::string primitive_id) {
  if (primitive_id.empty()) throw Error(ErrorKind::Structural, "leaf needs a primitive id");
  return CsgTree(Op::Leaf, std::move(primitive_id), {});
}

CsgTree CsgTree::unite(std::vector<CsgTree> children) {
  if (children.size() < 2) throw Error(ErrorKind::Structural, "union needs at least two children");
  return CsgTree(Op::Union, {}, std::move(children));
}

CsgTree CsgTree::intersect(std::vector<CsgTree> children) {
  if (children.size() < 2) {
    throw Error(ErrorKind::Structural, "intersection needs at least two children");
  }
  return CsgTree(Op::Intersection, {}, std::move(children));
}

CsgTree CsgTree::complement(CsgTree child) {
  std::vector<CsgTree> children;
  children.push_back(std::move(child));
  return CsgTree(Op::Complement, {}, std::move(children));
}

std::string CsgTree::to_string() const {
  auto wrapped = [](const CsgTree& c) {
    if (c.op() == Op::Leaf || c.op() == Op::Complement) return c.to_string();
    return "(" + c.to_string() + ")";
  };
  switch (op_) {
    case Op::Leaf:
      return primitive_;
    case Op::Complement:
      return "!" + wrapped(children_.front());
    case Op::Union:
    case Op::Intersection: {
      const char* sep = op_ == Op::Union ? " | " : " & ";
      std::string out;
      for (std::size_t i = 0; i < children_.size(); ++i) {
        if (i) out += sep;
        out += wrapped(children_[i]);
      }
      return out;
    }
  }
  return {};
}

std::size_t leaf_count(const CsgTree& tree) {
  if (tree.op() == CsgTree::Op::Leaf) return 1;
  std::size_t n = 0;
  for (const auto& c : tree.children()) n += leaf_count(c);
  return n;
}

void validate(const CsgTree& tree, const PrimitiveSet& primitives) {
  if (tree.op() == CsgTree::Op::Leaf) {
    primitives.index_of(tree.primitive());
    return;
  }
  for (const auto& c : tree.children()) validate(c, primitives);
}

double tree_value(const CsgTree& tree, const PrimitiveSet& primitives, const Vec3& point) {
  return evaluate(tree, primitives, point).value;
}

Membership tree_membership(const CsgTree& tree, const PrimitiveSet& primitives,
                           const Vec3& point) {
  return tree_value(tree, primitives, point) < 0.0 ? Membership::Inside : Membership::Outside;
}

bool is_bounded(const CsgTree& tree) { return boundedness(tree).first; }

bool PointCloud::has_normals() const {
  return std::all_of(points.begin(), points.end(),
                     [](const CloudPoint& p) { return p.normal.has_value(); });
}

PointIndex::PointIndex(std::span<const CloudPoint> points) {
  positions_.reserve(points.size());
  for (const auto& p : points) positions_.push_back(p.position);
  order_.resize(positions_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!order_.empty()) build(0, order_.size());
}

std::size_t PointIndex::build(std::size_t begin, std::size_t end) {
  const std::size_t id = nodes_.size();
  nodes_.push_back({begin, end, -1, 0.0, 0, 0});
  if (end - begin <= 8) return id;

  Vec3 lo = positions_[order_[begin]], hi = lo;
  for (std::size_t i = begin; i < end; ++i) {
    const Vec3& p = positions_[order_[i]];
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  const Vec3 extent = hi - lo;
  const int axis = extent.x >= extent.y ? (extent.x >= extent.z ? 0 : 2) : (extent.y >= extent.z ? 1 : 2);
  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) {
                     const double pa = positions_[a][axis], pb = positions_[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  const double split = positions_[order_[mid]][axis];
  const std::size_t left = build(begin, mid);
  const std::size_t right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void PointIndex::search(std::size_t node_id, const Vec3& q, std::size_t& best,
                        double& best_d2) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (std::size_t i = node.begin; i < node.end; ++i) {
      const std::size_t idx = order_[i];
      const Vec3 d = positions_[idx] - q;
      const double d2 = d.dot(d);
      if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
        best_d2 = d2;
        best = idx;
      }
    }
    return;
  }
  const double delta = q[node.axis] - node.split;
  const std::size_t near = delta < 0 ? node.left : node.right;
  const std::size_t far = delta < 0 ? node.right : node.left;
  search(near, q, best, best_d2);
  if (delta * delta <= best_d2) search(far, q, best, best_d2);
}

std::size_t PointIndex::nearest(const Vec3& query) const {
  std::size_t best = std::numeric_limits<std::size_t>::max();
  double best_d2 = std::numeric_limits<double>::infinity();
  search(0, query, best, best_d2);
  return best;
}

namespace {

void require_oriented(const PointCloud& cloud) {
  if (cloud.points.empty()) throw Error(ErrorKind::UnsupportedOracle, "point cloud is empty");
  if (!cloud.has_normals()) {
    throw Error(ErrorKind::UnsupportedOracle, "point cloud oracle requires normals on every point");
  }
}

Membership halfspace_side(const CloudPoint& nearest, const Vec3& point) {
  return (point - nearest.position).dot(*nearest.normal) < 0.0 ? Membership::Inside
                                                               : Membership::Outside;
}

}  // namespace

Membership cloud_membership(const PointCloud& cloud, const Vec3& point) {
  require_oriented(cloud);
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Vec3 d = cloud.points[i].position - point;
    const double d2 = d.dot(d);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return halfspace_side(cloud.points[best], point);
}

SolidOracle SolidOracle::ground_truth(CsgTree tree, PrimitiveSet primitives) {
  validate(tree, primitives);
  SolidOracle oracle;
  oracle.truth_.emplace(Truth{std::move(tree), std::move(primitives)});
  return oracle;
}

SolidOracle SolidOracle::cloud(PointCloud cloud) {
  require_oriented(cloud);
  SolidOracle oracle;
  PointIndex index(cloud.points);
  oracle.cloud_.emplace(Cloud{std::move(cloud), std::move(index)});
  return oracle;
}

Membership SolidOracle::classify(const Vec3& point) const {
  if (truth_) return tree_membership(truth_->tree, truth_->primitives, point);
  const auto& c = *cloud_;
  return halfspace_side(c.cloud.points[c.index.nearest(point)], point);
}

double SolidOracle::surface_distance(const Vec3& point) const {
  if (truth_) return std::abs(tree_value(truth_->tree, truth_->primitives, point));
  const auto& c = *cloud_;
  return (c.cloud.points[c.index.nearest(point)].position - point).norm();
}

std::vector<Vec3> sample_region(std::span<const Primitive> positive,
                                std::span<const Primitive> negative, std::size_t count,
                                std::uint64_t seed) {
  if (positive.empty()) {
    throw Error(ErrorKind::Parameter, "sample_region needs at least one positive primitive");
  }
  std::vector<Vec3> out;
  Aabb box = positive.front().bounds();
  for (const auto& p : positive) box = box.intersect(p.bounds());
  if (box.empty() || count == 0) return out;

  out.reserve(count);
  Rng rng(seed);
  const std::size_t max_attempts = 64 * count;
  for (std::size_t attempt = 0; attempt < max_attempts && out.size() < count; ++attempt) {
    const Vec3 x{rng.uniform(box.lo.x, box.hi.x), rng.uniform(box.lo.y, box.hi.y),
                 rng.uniform(box.lo.z, box.hi.z)};
    const bool accepted =
        std::all_of(positive.begin(), positive.end(),
                    [&](const Primitive& p) { return p.signed_distance(x) < 0.0; }) &&
        std::all_of(negative.begin(), negative.end(),
                    [&](const Primitive& p) { return p.signed_distance(x) >= 0.0; });
    if (accepted) out.push_back(x);
  }
  return out;
}

PointCloud sample_surface(const CsgTree& tree, const PrimitiveSet& primitives, std::size_t count,
                          std::uint64_t seed) {
  validate(tree, primitives);
  if (!is_bounded(tree)) throw Error(ErrorKind::Structural, "cannot sample an unbounded tree");

  std::set<std::string> leaf_ids;
  collect_leaves(tree, leaf_ids);
  std::vector<const Primitive*> leaves;
  std::vector<double> cumulative_area;
  double total_area = 0.0;
  for (const auto& id : leaf_ids) {
    leaves.push_back(&primitives.at(id));
    total_area += leaves.back()->surface_area();
    cumulative_area.push_back(total_area);
  }

  const double scale = primitives.bounds().diagonal();
  const double on_surface = 1e-9 * std::max(1.0, scale);
  const double step = 1e-6 * std::max(1.0, scale);

  PointCloud cloud;
  cloud.points.reserve(count);
  Rng rng(seed);
  const std::size_t max_attempts = 64 * count;
  for (std::size_t attempt = 0; attempt < max_attempts && cloud.points.size() < count; ++attempt) {
    const double pick = rng.uniform() * total_area;
    const auto it = std::upper_bound(cumulative_area.begin(), cumulative_area.end(), pick);
    const std::size_t which = std::min<std::size_t>(
        static_cast<std::size_t>(it - cumulative_area.begin()), leaves.size() - 1);
    const Vec3 x = leaves[which]->sample_surface(rng);
    const TreeEval e = evaluate(tree, primitives, x);
    if (std::abs(e.value) > on_surface) continue;
    Vec3 n = gradient(*e.active, x, step) * e.sign;
    const double len = n.norm();
    if (!(len > 1e-12)) continue;
    n = n * (1.0 / len);
    // Zero-valued seams between union terms are interior, not boundary.
    const double probe = 1e3 * step;
    if (tree_membership(tree, primitives, x + n * probe) != Membership::Outside ||
        tree_membership(tree, primitives, x - n * probe) != Membership::Inside) {
      continue;
    }
    cloud.points.push_back({x, n});
  }
  return cloud;
}

}  // namespace qcsg
