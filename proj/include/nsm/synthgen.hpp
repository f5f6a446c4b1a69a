#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsm/core/error.hpp"
#include "nsm/core/geometry.hpp"
#include "nsm/core/parallel.hpp"
#include "nsm/core/random.hpp"

namespace nsm {

enum class TerrainKind { flat, slope, undulation };

struct TerrainSpec {
  TerrainKind kind = TerrainKind::flat;
  double slope_deg = 0.0;    ///< slope: inclination
  double azimuth_deg = 0.0;  ///< slope: downhill-to-uphill direction
  double amplitude = 0.0;    ///< undulation
  double wavelength = 20.0;  ///< undulation

  double height(double x, double y) const {
    switch (kind) {
      case TerrainKind::flat: return 0.0;
      case TerrainKind::slope: {
        const double az = azimuth_deg * std::numbers::pi / 180.0;
        return std::tan(slope_deg * std::numbers::pi / 180.0) * (x * std::cos(az) + y * std::sin(az));
      }
      case TerrainKind::undulation: {
        const double k = 2.0 * std::numbers::pi / wavelength;
        return amplitude * std::sin(k * x) * std::cos(k * y);
      }
    }
    return 0.0;
  }
};

struct SceneSpec {
  std::uint64_t seed = 1;
  double extent_x = 40.0;  ///< meters, scene spans [-x/2, x/2]
  double extent_y = 40.0;
  TerrainSpec terrain;
  std::size_t trees = 18;
  std::size_t bushes = 12;
  std::size_t boxes = 0;
  double clutter_density = 0.05;  ///< points / m^2
  double object_density = 100.0;  ///< surface points / m^2
  double ground_spacing = 0.15;   ///< terrain grid pitch, meters
  double ground_jitter = 0.3;     ///< fraction of the pitch
  double ground_noise = 0.01;     ///< vertical sigma, meters
  double min_spacing = 1.0;       ///< clearance between object footprints, meters
  double edge_margin = 2.5;       ///< footprint clearance from the scene border
  double linkage_distance = 0.2;  ///< segmentation radius the spacing must exceed
  bool allow_tight_spacing = false;
  std::size_t max_attempts = 2000;  ///< placement tries per object

  void validate() const {
    if (!(extent_x > 0.0) || !(extent_y > 0.0)) throw ValidationError("scene extent must be > 0");
    if (!(object_density > 0.0)) throw ValidationError("scene object_density must be > 0");
    if (!(ground_spacing > 0.0)) throw ValidationError("scene ground_spacing must be > 0");
    if (clutter_density < 0.0 || ground_noise < 0.0 || ground_jitter < 0.0 || edge_margin < 0.0) {
      throw ValidationError("scene densities, noise and margins must be >= 0");
    }
    if (terrain.kind == TerrainKind::undulation && !(terrain.wavelength > 0.0)) {
      throw ValidationError("scene terrain wavelength must be > 0");
    }
    if (!allow_tight_spacing && !(min_spacing > linkage_distance)) {
      throw ValidationError("scene min_spacing must exceed the segmentation linkage distance (set allow_tight_spacing to override)");
    }
    if (max_attempts == 0) throw ValidationError("scene max_attempts must be >= 1");
  }
};

enum class ObjectType { tree, bush, box };

inline std::string_view to_string(ObjectType t) {
  switch (t) {
    case ObjectType::tree: return "tree";
    case ObjectType::bush: return "bush";
    case ObjectType::box: return "box";
  }
  return "unknown";
}

/// Point labels. Objects use their registry index (>= 0).
inline constexpr std::int32_t kLabelGround = -1;
inline constexpr std::int32_t kLabelClutter = -2;

struct SceneObject {
  std::int32_t id = 0;
  ObjectType type = ObjectType::tree;
  Point base = Point::Zero();  ///< footprint center on the terrain
  double yaw = 0.0;
  double footprint_radius = 0.0;
  // Shape parameters in the object frame (z up from base).
  double trunk_radius = 0.0, trunk_height = 0.0;
  Eigen::Vector3d axes = Eigen::Vector3d::Zero();  ///< canopy / dome semi-axes, or box half-extents
  double lift = 0.0;                               ///< bush / box clearance above the base
  Point center = Point::Zero();                    ///< true shape center in scene coordinates

  Eigen::Matrix3d frame() const { return Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix(); }

  /// Object-frame axis-aligned bounds (min, max).
  std::pair<Eigen::Vector3d, Eigen::Vector3d> local_bounds() const {
    switch (type) {
      case ObjectType::tree: {
        const double top = trunk_height + 0.7 * axes.z() + axes.z();
        return {{-axes.x(), -axes.y(), 0.0}, {axes.x(), axes.y(), top}};
      }
      case ObjectType::bush: return {{-axes.x(), -axes.y(), lift}, {axes.x(), axes.y(), lift + axes.z()}};
      case ObjectType::box: return {{-axes.x(), -axes.y(), lift}, {axes.x(), axes.y(), lift + 2.0 * axes.z()}};
    }
    return {};
  }

  /// Whether a scene point lies in the object's bounds inflated by `margin`.
  bool contains(const Point& p, double margin) const {
    const Eigen::Vector3d local = frame().transpose() * (p - base);
    const auto [lo, hi] = local_bounds();
    for (int a = 0; a < 3; ++a) {
      if (local[a] < lo[a] - margin || local[a] > hi[a] + margin) return false;
    }
    return true;
  }
};

struct LabeledScene {
  PointCloud cloud;
  std::vector<std::int32_t> labels;  ///< per point: ground, clutter or object id
  std::vector<std::uint8_t> foliage; ///< 1 for canopy and bush shell points
  std::vector<SceneObject> objects;
  TerrainSpec terrain;

  std::size_t count_label(std::int32_t label) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
  }
};

namespace detail {

/// Approximate ellipsoid surface area (Knud Thomsen, p = 1.6075).
inline double ellipsoid_area(double a, double b, double c) {
  constexpr double p = 1.6075;
  const double m = (std::pow(a * b, p) + std::pow(a * c, p) + std::pow(b * c, p)) / 3.0;
  return 4.0 * std::numbers::pi * std::pow(m, 1.0 / p);
}

inline std::size_t point_budget(double density, double area) {
  return static_cast<std::size_t>(std::lround(std::max(0.0, density * area)));
}

/// Area-uniform point on an ellipsoid surface by rejection on the unit sphere. upper restricts to z >= 0.
inline Eigen::Vector3d sample_ellipsoid(Rng& rng, const Eigen::Vector3d& axes, bool upper) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double a = axes.x(), b = axes.y(), c = axes.z();
  const double g_max = std::max({b * c, a * c, a * b});
  for (;;) {
    Eigen::Vector3d u(gauss(rng), gauss(rng), gauss(rng));
    const double n = u.norm();
    if (n < 1e-12) continue;
    u /= n;
    if (upper) u.z() = std::abs(u.z());
    const double g = std::sqrt(std::pow(b * c * u.x(), 2) + std::pow(a * c * u.y(), 2) + std::pow(a * b * u.z(), 2));
    if (uniform_real(rng, 0.0, g_max) <= g) return {a * u.x(), b * u.y(), c * u.z()};
  }
}

inline bool inside_ellipsoid(const Eigen::Vector3d& p, const Eigen::Vector3d& center, const Eigen::Vector3d& axes) {
  const Eigen::Vector3d q = (p - center).cwiseQuotient(axes);
  return q.squaredNorm() < 1.0;
}

struct ObjectPoints {
  std::vector<Point> points;
  std::vector<std::uint8_t> foliage;
};

inline ObjectPoints sample_object(const SceneObject& obj, double density, Rng& rng) {
  ObjectPoints out;
  std::vector<Eigen::Vector3d> local;
  std::vector<std::uint8_t> leafy;
  const double two_pi = 2.0 * std::numbers::pi;
  switch (obj.type) {
    case ObjectType::tree: {
      const Eigen::Vector3d canopy_center(0.0, 0.0, obj.trunk_height + 0.7 * obj.axes.z());
      const std::size_t n_trunk = point_budget(density, two_pi * obj.trunk_radius * obj.trunk_height);
      for (std::size_t i = 0; i < n_trunk; ++i) {
        const double th = uniform_real(rng, 0.0, two_pi);
        const Eigen::Vector3d p(obj.trunk_radius * std::cos(th), obj.trunk_radius * std::sin(th),
                                uniform_real(rng, 0.0, obj.trunk_height));
        if (inside_ellipsoid(p, canopy_center, obj.axes)) continue;
        local.push_back(p);
        leafy.push_back(0);
      }
      const std::size_t n_canopy = point_budget(density, ellipsoid_area(obj.axes.x(), obj.axes.y(), obj.axes.z()));
      for (std::size_t i = 0; i < n_canopy; ++i) {
        local.push_back(canopy_center + sample_ellipsoid(rng, obj.axes, false));
        leafy.push_back(1);
      }
      break;
    }
    case ObjectType::bush: {
      const Eigen::Vector3d base(0.0, 0.0, obj.lift);
      const std::size_t n_dome = point_budget(density, 0.5 * ellipsoid_area(obj.axes.x(), obj.axes.y(), obj.axes.z()));
      for (std::size_t i = 0; i < n_dome; ++i) {
        local.push_back(base + sample_ellipsoid(rng, obj.axes, true));
        leafy.push_back(1);
      }
      const std::size_t n_floor = point_budget(density, std::numbers::pi * obj.axes.x() * obj.axes.y());
      for (std::size_t i = 0; i < n_floor; ++i) {
        const double r = std::sqrt(uniform_real(rng, 0.0, 1.0));
        const double th = uniform_real(rng, 0.0, two_pi);
        local.emplace_back(obj.axes.x() * r * std::cos(th), obj.axes.y() * r * std::sin(th), obj.lift);
        leafy.push_back(1);
      }
      break;
    }
    case ObjectType::box: {
      const double hx = obj.axes.x(), hy = obj.axes.y(), h = 2.0 * obj.axes.z(), z0 = obj.lift;
      // top, +x, -x, +y, -y; open at the bottom
      const std::array<double, 5> areas{4 * hx * hy, 2 * hy * h, 2 * hy * h, 2 * hx * h, 2 * hx * h};
      for (std::size_t f = 0; f < areas.size(); ++f) {
        const std::size_t n = point_budget(density, areas[f]);
        for (std::size_t i = 0; i < n; ++i) {
          const double u = uniform_real(rng, -1.0, 1.0), v = uniform_real(rng, 0.0, 1.0);
          switch (f) {
            case 0: local.emplace_back(hx * u, hy * uniform_real(rng, -1.0, 1.0), z0 + h); break;
            case 1: local.emplace_back(hx, hy * u, z0 + h * v); break;
            case 2: local.emplace_back(-hx, hy * u, z0 + h * v); break;
            case 3: local.emplace_back(hx * u, hy, z0 + h * v); break;
            default: local.emplace_back(hx * u, -hy, z0 + h * v); break;
          }
          leafy.push_back(0);
        }
      }
      break;
    }
  }
  const Eigen::Matrix3d r = obj.frame();
  out.points.reserve(local.size());
  for (const auto& p : local) out.points.push_back(obj.base + r * p);
  out.foliage = std::move(leafy);
  return out;
}

inline SceneObject draw_shape(ObjectType type, Rng& rng) {
  SceneObject o;
  o.type = type;
  o.yaw = uniform_real(rng, 0.0, 2.0 * std::numbers::pi);
  switch (type) {
    case ObjectType::tree: {
      o.trunk_radius = uniform_real(rng, 0.10, 0.16);
      o.trunk_height = uniform_real(rng, 1.0, 1.5);
      const double a = uniform_real(rng, 0.9, 1.15);
      o.axes = {a, a * uniform_real(rng, 0.5, 0.75), uniform_real(rng, 0.8, 1.0)};
      o.footprint_radius = a;
      break;
    }
    case ObjectType::bush: {
      const double a = uniform_real(rng, 1.0, 1.3);
      o.axes = {a, a * uniform_real(rng, 0.5, 0.75), uniform_real(rng, 0.8, 1.1)};
      o.lift = 0.25;
      o.footprint_radius = a;
      break;
    }
    case ObjectType::box: {
      const double hx = uniform_real(rng, 0.7, 1.0);
      o.axes = {hx, hx * uniform_real(rng, 0.55, 0.7), 0.5 * uniform_real(rng, 0.8, 1.1)};
      o.lift = 0.25;
      o.footprint_radius = std::hypot(o.axes.x(), o.axes.y());
      break;
    }
  }
  return o;
}

}  // namespace detail

/**
 * @brief Seeded synthetic scene: terrain grid, trees, bushes, boxes and sparse clutter.
 *
 * Objects are placed by rejection sampling so footprints keep min_spacing of
 * clearance. Surface points are drawn per object from substream (seed, index),
 * so output does not depend on `threads`. Point order: ground, objects by id,
 * clutter.
 */
inline LabeledScene generate_scene(const SceneSpec& spec, unsigned threads = 1) {
  spec.validate();
  LabeledScene scene;
  scene.terrain = spec.terrain;
  scene.cloud.frame_id = "scene";
  const double hx = 0.5 * spec.extent_x, hy = 0.5 * spec.extent_y;

  Rng placement = make_rng(spec.seed, {0x91aceULL});
  std::vector<ObjectType> types;
  types.insert(types.end(), spec.trees, ObjectType::tree);
  types.insert(types.end(), spec.bushes, ObjectType::bush);
  types.insert(types.end(), spec.boxes, ObjectType::box);
  for (std::size_t i = 0; i < types.size(); ++i) {
    SceneObject o = detail::draw_shape(types[i], placement);
    o.id = static_cast<std::int32_t>(i);
    const double mx = hx - spec.edge_margin - o.footprint_radius, my = hy - spec.edge_margin - o.footprint_radius;
    if (mx <= 0.0 || my <= 0.0) throw ValidationError("scene extent too small for its objects");
    bool placed = false;
    for (std::size_t attempt = 0; attempt < spec.max_attempts && !placed; ++attempt) {
      const double x = uniform_real(placement, -mx, mx), y = uniform_real(placement, -my, my);
      placed = std::all_of(scene.objects.begin(), scene.objects.end(), [&](const SceneObject& other) {
        return std::hypot(other.base.x() - x, other.base.y() - y) >= o.footprint_radius + other.footprint_radius + spec.min_spacing;
      });
      if (placed) o.base = {x, y, spec.terrain.height(x, y)};
    }
    if (!placed) {
      throw ValidationError("scene: could not place object " + std::to_string(i) + " after " +
                            std::to_string(spec.max_attempts) + " attempts; spacing infeasible");
    }
    const auto [lo, hi] = o.local_bounds();
    o.center = o.base + o.frame() * (0.5 * (lo + hi));
    scene.objects.push_back(o);
  }

  // Ground grid with jitter.
  {
    Rng rng = make_rng(spec.seed, {0x6a0dULL});
    std::normal_distribution<double> noise(0.0, 1.0);
    const auto nx = static_cast<std::size_t>(std::floor(spec.extent_x / spec.ground_spacing)) + 1;
    const auto ny = static_cast<std::size_t>(std::floor(spec.extent_y / spec.ground_spacing)) + 1;
    const double j = spec.ground_jitter * spec.ground_spacing;
    scene.cloud.points.reserve(nx * ny);
    for (std::size_t iy = 0; iy < ny; ++iy) {
      for (std::size_t ix = 0; ix < nx; ++ix) {
        double x = -hx + static_cast<double>(ix) * spec.ground_spacing;
        double y = -hy + static_cast<double>(iy) * spec.ground_spacing;
        if (j > 0.0) {
          x = std::clamp(x + uniform_real(rng, -j, j), -hx, hx);
          y = std::clamp(y + uniform_real(rng, -j, j), -hy, hy);
        }
        const double dz = spec.ground_noise > 0.0 ? spec.ground_noise * noise(rng) : 0.0;
        scene.cloud.points.emplace_back(x, y, spec.terrain.height(x, y) + dz);
      }
    }
    scene.labels.assign(scene.cloud.size(), kLabelGround);
    scene.foliage.assign(scene.cloud.size(), 0);
  }

  std::vector<detail::ObjectPoints> sampled(scene.objects.size());
  parallel_for(scene.objects.size(), threads, [&](std::size_t i) {
    Rng rng = make_rng(spec.seed, {0x0b1ec7ULL, i});
    sampled[i] = detail::sample_object(scene.objects[i], spec.object_density, rng);
  });
  for (std::size_t i = 0; i < sampled.size(); ++i) {
    scene.cloud.points.insert(scene.cloud.points.end(), sampled[i].points.begin(), sampled[i].points.end());
    scene.labels.insert(scene.labels.end(), sampled[i].points.size(), static_cast<std::int32_t>(i));
    scene.foliage.insert(scene.foliage.end(), sampled[i].foliage.begin(), sampled[i].foliage.end());
  }

  {
    Rng rng = make_rng(spec.seed, {0xc1077eULL});
    const std::size_t n = detail::point_budget(spec.clutter_density, spec.extent_x * spec.extent_y);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = uniform_real(rng, -hx, hx), y = uniform_real(rng, -hy, hy);
      scene.cloud.points.emplace_back(x, y, spec.terrain.height(x, y) + uniform_real(rng, 0.4, 2.5));
      scene.labels.push_back(kLabelClutter);
      scene.foliage.push_back(0);
    }
  }
  return scene;
}

struct Perturbation {
  double keep_fraction = 1.0;  ///< Bernoulli resampling
  double noise_sigma = 0.0;    ///< isotropic Gaussian, meters
  double occlusion_deg = 0.0;  ///< azimuth sector removed per object, random direction
  double canopy_jitter = 0.0;  ///< extra Gaussian sigma on foliage points

  void validate() const {
    if (!(keep_fraction > 0.0) || keep_fraction > 1.0) throw ValidationError("perturbation keep_fraction must be in (0, 1]");
    if (noise_sigma < 0.0 || canopy_jitter < 0.0) throw ValidationError("perturbation sigmas must be >= 0");
    if (occlusion_deg < 0.0 || occlusion_deg > 360.0) throw ValidationError("perturbation occlusion_deg must be in [0, 360]");
  }
};

struct DerivedSource {
  PointCloud cloud;                  ///< expressed in the source frame
  std::vector<std::int32_t> labels;  ///< labels of the surviving points
  RigidTransform gt;                 ///< source -> scene (target) frame
};

/**
 * @brief Observation of `scene` from another pose.
 *
 * Points are resampled, occluded per object, jittered and noised in the scene
 * frame, then mapped into the source frame by gt^-1, so that gt aligns the
 * returned cloud with the scene. Identity with no perturbation returns the
 * scene cloud unchanged.
 */
inline DerivedSource derive_source(const LabeledScene& scene, const RigidTransform& gt, const Perturbation& perturbation,
                                   std::uint64_t seed) {
  perturbation.validate();
  DerivedSource out;
  out.gt = gt;
  out.cloud.frame_id = "source";
  const RigidTransform to_source = gt.inverse();
  const double two_pi = 2.0 * std::numbers::pi;
  const double sector = perturbation.occlusion_deg * std::numbers::pi / 180.0;

  std::vector<double> occlusion_start(scene.objects.size(), 0.0);
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    Rng rng = make_rng(seed, {0x0cc1ULL, i});
    occlusion_start[i] = uniform_real(rng, 0.0, two_pi);
  }

  Rng rng = make_rng(seed, {0x5a3bULL});
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < scene.cloud.size(); ++i) {
    if (perturbation.keep_fraction < 1.0 && uniform_real(rng, 0.0, 1.0) >= perturbation.keep_fraction) continue;
    Point p = scene.cloud[i];
    const std::int32_t label = scene.labels[i];
    if (label >= 0 && sector > 0.0) {
      const auto& obj = scene.objects[static_cast<std::size_t>(label)];
      const double az = std::atan2(p.y() - obj.base.y(), p.x() - obj.base.x());
      double rel = std::fmod(az - occlusion_start[static_cast<std::size_t>(label)], two_pi);
      if (rel < 0.0) rel += two_pi;
      if (rel < sector) continue;
    }
    if (perturbation.canopy_jitter > 0.0 && scene.foliage[i]) {
      p += perturbation.canopy_jitter * Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
    }
    if (perturbation.noise_sigma > 0.0) {
      p += perturbation.noise_sigma * Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
    }
    out.cloud.points.push_back(to_source.apply(p));
    out.labels.push_back(label);
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON schema (see README for the field list)
// ---------------------------------------------------------------------------

inline TerrainKind parse_terrain_kind(const std::string& s) {
  if (s == "flat") return TerrainKind::flat;
  if (s == "slope") return TerrainKind::slope;
  if (s == "undulation") return TerrainKind::undulation;
  throw ValidationError("unknown terrain type '" + s + "'");
}

inline std::string_view to_string(TerrainKind k) {
  switch (k) {
    case TerrainKind::flat: return "flat";
    case TerrainKind::slope: return "slope";
    case TerrainKind::undulation: return "undulation";
  }
  return "flat";
}

namespace detail {

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("scene spec field '") + key + "': " + e.what());
  }
}

inline void check_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed, const char* where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError(std::string("unknown field '") + key + "' in " + where);
    }
  }
}

}  // namespace detail

inline SceneSpec scene_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("scene spec must be a JSON object");
  detail::check_keys(j,
                     {"seed", "extent", "terrain", "objects", "clutter_density", "object_density", "ground_spacing",
                      "ground_jitter", "ground_noise", "min_spacing", "edge_margin", "linkage_distance",
                      "allow_tight_spacing", "max_attempts", "source"},
                     "scene spec");
  SceneSpec s;
  detail::read_opt(j, "seed", s.seed);
  if (j.contains("extent")) {
    const auto& e = j.at("extent");
    if (e.is_number()) {
      s.extent_x = s.extent_y = e.get<double>();
    } else if (e.is_array() && e.size() == 2) {
      s.extent_x = e[0].get<double>();
      s.extent_y = e[1].get<double>();
    } else {
      throw ValidationError("scene spec 'extent' must be a number or [x, y]");
    }
  }
  if (j.contains("terrain")) {
    const auto& t = j.at("terrain");
    detail::check_keys(t, {"type", "slope_deg", "azimuth_deg", "amplitude", "wavelength"}, "terrain");
    std::string kind = "flat";
    detail::read_opt(t, "type", kind);
    s.terrain.kind = parse_terrain_kind(kind);
    detail::read_opt(t, "slope_deg", s.terrain.slope_deg);
    detail::read_opt(t, "azimuth_deg", s.terrain.azimuth_deg);
    detail::read_opt(t, "amplitude", s.terrain.amplitude);
    detail::read_opt(t, "wavelength", s.terrain.wavelength);
  }
  if (j.contains("objects")) {
    const auto& o = j.at("objects");
    detail::check_keys(o, {"trees", "bushes", "boxes"}, "objects");
    for (const char* key : {"trees", "bushes", "boxes"}) {
      if (o.contains(key) && !(o.at(key).is_number_integer() && o.at(key).get<long long>() >= 0)) {
        throw ValidationError(std::string("objects.") + key + " must be a non-negative integer");
      }
    }
    detail::read_opt(o, "trees", s.trees);
    detail::read_opt(o, "bushes", s.bushes);
    detail::read_opt(o, "boxes", s.boxes);
  }
  detail::read_opt(j, "clutter_density", s.clutter_density);
  detail::read_opt(j, "object_density", s.object_density);
  detail::read_opt(j, "ground_spacing", s.ground_spacing);
  detail::read_opt(j, "ground_jitter", s.ground_jitter);
  detail::read_opt(j, "ground_noise", s.ground_noise);
  detail::read_opt(j, "min_spacing", s.min_spacing);
  detail::read_opt(j, "edge_margin", s.edge_margin);
  detail::read_opt(j, "linkage_distance", s.linkage_distance);
  detail::read_opt(j, "allow_tight_spacing", s.allow_tight_spacing);
  detail::read_opt(j, "max_attempts", s.max_attempts);
  s.validate();
  return s;
}

inline nlohmann::json to_json(const SceneSpec& s) {
  return {{"seed", s.seed},
          {"extent", {s.extent_x, s.extent_y}},
          {"terrain",
           {{"type", std::string(to_string(s.terrain.kind))},
            {"slope_deg", s.terrain.slope_deg},
            {"azimuth_deg", s.terrain.azimuth_deg},
            {"amplitude", s.terrain.amplitude},
            {"wavelength", s.terrain.wavelength}}},
          {"objects", {{"trees", s.trees}, {"bushes", s.bushes}, {"boxes", s.boxes}}},
          {"clutter_density", s.clutter_density},
          {"object_density", s.object_density},
          {"ground_spacing", s.ground_spacing},
          {"ground_jitter", s.ground_jitter},
          {"ground_noise", s.ground_noise},
          {"min_spacing", s.min_spacing},
          {"edge_margin", s.edge_margin},
          {"linkage_distance", s.linkage_distance},
          {"allow_tight_spacing", s.allow_tight_spacing},
          {"max_attempts", s.max_attempts}};
}

/// Optional "source" block of a scene spec.
struct SourceSpec {
  RigidTransform gt;
  Perturbation perturbation;
  std::uint64_t seed = 0;
};

inline SourceSpec source_spec_from_json(const nlohmann::json& j, std::uint64_t default_seed) {
  detail::check_keys(j, {"yaw_deg", "roll_deg", "pitch_deg", "translation", "keep_fraction", "noise", "occlusion_deg",
                         "canopy_jitter", "seed"},
                     "source");
  SourceSpec s;
  s.seed = default_seed;
  double yaw = 0.0, roll = 0.0, pitch = 0.0;
  std::array<double, 3> t{0.0, 0.0, 0.0};
  detail::read_opt(j, "yaw_deg", yaw);
  detail::read_opt(j, "roll_deg", roll);
  detail::read_opt(j, "pitch_deg", pitch);
  detail::read_opt(j, "translation", t);
  detail::read_opt(j, "keep_fraction", s.perturbation.keep_fraction);
  detail::read_opt(j, "noise", s.perturbation.noise_sigma);
  detail::read_opt(j, "occlusion_deg", s.perturbation.occlusion_deg);
  detail::read_opt(j, "canopy_jitter", s.perturbation.canopy_jitter);
  detail::read_opt(j, "seed", s.seed);
  constexpr double deg = std::numbers::pi / 180.0;
  s.gt = RigidTransform::from_rpy(roll * deg, pitch * deg, yaw * deg, Eigen::Vector3d(t[0], t[1], t[2]));
  s.perturbation.validate();
  return s;
}

inline nlohmann::json labels_to_json(const LabeledScene& scene) {
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& o : scene.objects) {
    objects.push_back({{"id", o.id},
                       {"type", std::string(to_string(o.type))},
                       {"base", {o.base.x(), o.base.y(), o.base.z()}},
                       {"center", {o.center.x(), o.center.y(), o.center.z()}},
                       {"yaw", o.yaw},
                       {"points", scene.count_label(o.id)}});
  }
  return {{"labels", scene.labels},
          {"label_codes", {{"ground", kLabelGround}, {"clutter", kLabelClutter}, {"object", ">= 0, object id"}}},
          {"objects", objects}};
}

}  // namespace nsm
