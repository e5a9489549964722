/* Copyright 2026 The gaussocc Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "gaussocc/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "gaussocc/errors.hpp"

namespace gaussocc::io {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

constexpr char kGsbMagic[8] = {'G', 'S', 'B', '1', '\0', '\0', '\0', '\0'};

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw FormatError("cannot open " + path.string() + " for writing");
  }
  template <class T>
  void put(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  void close() {
    out_.close();
    if (!out_) throw FormatError("write to " + path_.string() + " failed");
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw FormatError("cannot open " + path.string());
  }
  template <class T>
  T get() {
    T v{};
    bytes(&v, sizeof(T));
    return v;
  }
  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw FormatError(path_.string() + ": truncated file");
  }
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
};

Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("expected a 3-vector, got " + j.dump());
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

void write_gsb(const GaussianSet& gs, const std::filesystem::path& path) {
  gs.validate();
  Writer w(path);
  w.bytes(kGsbMagic, sizeof(kGsbMagic));
  w.put(static_cast<std::uint32_t>(gs.size()));
  w.put(static_cast<std::uint32_t>(gs.num_classes));
  for (const auto& g : gs.primitives) {
    for (int k = 0; k < 3; ++k) w.put(g.mean[k]);
    for (int k = 0; k < 3; ++k) w.put(g.scale[k]);
    for (float r : g.rotation) w.put(r);
    w.put(g.opacity);
    w.bytes(g.semantics.data(), g.semantics.size() * sizeof(float));
  }
  for (const auto& p : gs.provenance) {
    w.put(p.view);
    w.put(p.row);
    w.put(p.col);
  }
  w.close();
}

GaussianSet read_gsb(const std::filesystem::path& path) {
  Reader r(path);
  char magic[8];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kGsbMagic, sizeof(magic)) != 0) throw FormatError(path.string() + ": not a GSB1 file");
  const auto count = r.get<std::uint32_t>();
  GaussianSet gs;
  gs.num_classes = r.get<std::uint32_t>();
  gs.primitives.resize(count);
  gs.provenance.resize(count);
  for (auto& g : gs.primitives) {
    for (int k = 0; k < 3; ++k) g.mean[k] = r.get<float>();
    for (int k = 0; k < 3; ++k) g.scale[k] = r.get<float>();
    for (float& q : g.rotation) q = r.get<float>();
    g.opacity = r.get<float>();
    g.semantics.resize(gs.num_classes);
    r.bytes(g.semantics.data(), g.semantics.size() * sizeof(float));
  }
  for (auto& p : gs.provenance) {
    p.view = r.get<std::uint32_t>();
    p.row = r.get<std::uint32_t>();
    p.col = r.get<std::uint32_t>();
  }
  if (!r.at_end()) throw FormatError(path.string() + ": trailing bytes after GSB1 payload");
  gs.validate();
  return gs;
}

void write_dpm(const DepthMap& map, const std::filesystem::path& path) {
  map.validate();
  Writer w(path);
  w.put(map.height);
  w.put(map.width);
  w.bytes(map.depth.data(), map.depth.size() * sizeof(float));
  w.bytes(map.uncertainty.data(), map.uncertainty.size() * sizeof(float));
  w.close();
}

DepthMap read_dpm(const std::filesystem::path& path) {
  Reader r(path);
  const auto h = r.get<std::uint32_t>();
  const auto w = r.get<std::uint32_t>();
  DepthMap m(h, w);
  r.bytes(m.depth.data(), m.depth.size() * sizeof(float));
  r.bytes(m.uncertainty.data(), m.uncertainty.size() * sizeof(float));
  if (!r.at_end()) throw FormatError(path.string() + ": trailing bytes after DPM1 payload");
  m.validate();
  return m;
}

void write_occ(const OccupancyGrid& grid, const std::filesystem::path& path, const std::vector<float>* probs) {
  grid.validate();
  if (probs && probs->size() != grid.labels.size() * (std::size_t{grid.num_classes} + 1)) {
    throw ShapeError("probability dump does not match the grid size");
  }
  Writer w(path);
  for (auto d : grid.geometry.dims) w.put(d);
  for (int k = 0; k < 3; ++k) w.put(static_cast<float>(grid.geometry.origin[k]));
  w.put(static_cast<float>(grid.geometry.voxel_size));
  w.put(grid.num_classes);
  w.bytes(grid.labels.data(), grid.labels.size());
  if (probs) w.bytes(probs->data(), probs->size() * sizeof(float));
  w.close();
}

OccFile read_occ(const std::filesystem::path& path) {
  Reader r(path);
  GridGeometry g;
  for (auto& d : g.dims) d = r.get<std::uint32_t>();
  for (int k = 0; k < 3; ++k) g.origin[k] = r.get<float>();
  g.voxel_size = r.get<float>();
  g.validate();
  OccFile f;
  f.grid = OccupancyGrid(g, r.get<std::uint32_t>());
  r.bytes(f.grid.labels.data(), f.grid.labels.size());
  if (!r.at_end()) {
    f.probs.resize(f.grid.labels.size() * (std::size_t{f.grid.num_classes} + 1));
    r.bytes(f.probs.data(), f.probs.size() * sizeof(float));
    if (!r.at_end()) throw FormatError(path.string() + ": trailing bytes after OCC1 payload");
  }
  f.grid.validate();
  return f;
}

Json to_json(const SceneSpec& s) {
  Json boxes = Json::array();
  for (const Box& b : s.boxes) {
    boxes.push_back({{"center", vec_json(b.center)},
                     {"half_extents", vec_json(b.half_extents)},
                     {"yaw", b.yaw},
                     {"class", b.class_id}});
  }
  return {{"seed", s.seed},
          {"num_classes", s.num_classes},
          {"extent_min", vec_json(s.extent_min)},
          {"extent_max", vec_json(s.extent_max)},
          {"ground", {{"enabled", s.has_ground}, {"z", s.ground_z}, {"class", s.ground_class}}},
          {"boxes", boxes}};
}

SceneSpec scene_from_json(const Json& j) {
  try {
    SceneSpec s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.num_classes = j.at("num_classes").get<std::uint32_t>();
    s.extent_min = vec_from(j.at("extent_min"));
    s.extent_max = vec_from(j.at("extent_max"));
    const Json& g = j.at("ground");
    s.has_ground = g.at("enabled").get<bool>();
    s.ground_z = g.at("z").get<double>();
    s.ground_class = g.at("class").get<std::uint32_t>();
    for (const Json& b : j.at("boxes")) {
      s.boxes.push_back({vec_from(b.at("center")), vec_from(b.at("half_extents")), b.at("yaw").get<double>(),
                         b.at("class").get<std::uint32_t>()});
    }
    s.validate();
    return s;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("scene JSON: ") + e.what());
  }
}

Json to_json(const SceneConfig& c) {
  return {{"num_boxes", c.num_boxes},
          {"num_classes", c.num_classes},
          {"extent_min", vec_json(c.extent_min)},
          {"extent_max", vec_json(c.extent_max)},
          {"ground", {{"enabled", c.has_ground}, {"z", c.ground_z}, {"class", c.ground_class}}},
          {"min_half_extent", c.min_half_extent},
          {"max_half_extent", c.max_half_extent},
          {"max_half_height", c.max_half_height},
          {"clear_radius", c.clear_radius},
          {"snap", c.snap}};
}

SceneConfig scene_config_from_json(const Json& j, SceneConfig c) {
  try {
    if (j.contains("num_boxes")) c.num_boxes = j["num_boxes"].get<std::uint32_t>();
    if (j.contains("num_classes")) c.num_classes = j["num_classes"].get<std::uint32_t>();
    if (j.contains("extent_min")) c.extent_min = vec_from(j["extent_min"]);
    if (j.contains("extent_max")) c.extent_max = vec_from(j["extent_max"]);
    if (j.contains("ground")) {
      const Json& g = j["ground"];
      if (g.contains("enabled")) c.has_ground = g["enabled"].get<bool>();
      if (g.contains("z")) c.ground_z = g["z"].get<double>();
      if (g.contains("class")) c.ground_class = g["class"].get<std::uint32_t>();
    }
    if (j.contains("min_half_extent")) c.min_half_extent = j["min_half_extent"].get<double>();
    if (j.contains("max_half_extent")) c.max_half_extent = j["max_half_extent"].get<double>();
    if (j.contains("max_half_height")) c.max_half_height = j["max_half_height"].get<double>();
    if (j.contains("clear_radius")) c.clear_radius = j["clear_radius"].get<double>();
    if (j.contains("snap")) c.snap = j["snap"].get<double>();
    return c;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("scene config: ") + e.what());
  }
}

Json to_json(const CameraModel& c) {
  Json rot = Json::array();
  for (int r = 0; r < 3; ++r) rot.push_back({c.rotation(r, 0), c.rotation(r, 1), c.rotation(r, 2)});
  return {{"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx}, {"cy", c.cy}, {"width", c.width},
          {"height", c.height}, {"rotation", rot}, {"translation", vec_json(c.translation)}};
}

CameraModel camera_from_json(const Json& j) {
  try {
    CameraModel c;
    c.fx = j.at("fx").get<double>();
    c.fy = j.at("fy").get<double>();
    c.cx = j.at("cx").get<double>();
    c.cy = j.at("cy").get<double>();
    c.width = j.at("width").get<std::uint32_t>();
    c.height = j.at("height").get<std::uint32_t>();
    const Json& rot = j.at("rotation");
    if (!rot.is_array() || rot.size() != 3) throw ConfigError("camera rotation must be 3x3");
    for (int r = 0; r < 3; ++r) c.rotation.row(r) = vec_from(rot[r]).transpose();
    c.translation = vec_from(j.at("translation"));
    c.validate();
    return c;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("camera JSON: ") + e.what());
  }
}

Json cameras_to_json(const std::vector<CameraModel>& cams) {
  Json a = Json::array();
  for (const auto& c : cams) a.push_back(to_json(c));
  return {{"cameras", a}};
}

std::vector<CameraModel> cameras_from_json(const Json& j) {
  std::vector<CameraModel> cams;
  const Json& a = j.is_array() ? j : j.at("cameras");
  for (const Json& c : a) cams.push_back(camera_from_json(c));
  return cams;
}

Json to_json(const GaussianSet& gs) {
  Json a = Json::array();
  for (std::size_t i = 0; i < gs.size(); ++i) {
    const auto& g = gs.primitives[i];
    const auto& p = gs.provenance[i];
    a.push_back({{"mean", {g.mean.x(), g.mean.y(), g.mean.z()}},
                 {"scale", {g.scale.x(), g.scale.y(), g.scale.z()}},
                 {"rotation", g.rotation},
                 {"opacity", g.opacity},
                 {"semantics", g.semantics},
                 {"source", {p.view, p.row, p.col}}});
  }
  return {{"num_classes", gs.num_classes}, {"gaussians", a}};
}

Json to_json(const MetricReport& r) {
  Json per_class = Json::array();
  for (const auto& v : r.occupancy.per_class) per_class.push_back(v ? Json(*v) : Json(nullptr));
  Json j = {{"iou", r.occupancy.iou}, {"miou", r.occupancy.miou}, {"per_class_iou", per_class}};
  if (r.rays) {
    Json per = Json::object();
    for (std::size_t i = 0; i < r.rays->thresholds.size(); ++i) {
      per[Json(r.rays->thresholds[i]).dump()] = r.rays->per_threshold[i];
    }
    j["rayiou"] = r.rays->mean;
    j["rayiou_per_threshold"] = per;
    j["rays"] = r.rays->rays;
  }
  if (r.init) {
    j["perc"] = r.init->perc;
    j["dist"] = r.init->dist;
  }
  return j;
}

Json to_json(const LossReport& r) {
  return {{"total", r.total},
          {"occ_ce", r.occ_ce},
          {"occ_lovasz", r.occ_lovasz},
          {"depth_term", r.depth_term},
          {"gradient_term", r.gradient_term},
          {"uncertainty_term", r.uncertainty_term},
          {"weights", {{"occ", r.weights.occ}, {"depth", r.weights.depth}, {"alpha_unc", r.weights.alpha_unc}}}};
}

Json to_json(const GridGeometry& g) {
  return {{"dims", g.dims}, {"origin", vec_json(g.origin)}, {"voxel_size", g.voxel_size}};
}

GridGeometry geometry_from_json(const Json& j) {
  try {
    GridGeometry g;
    g.dims = j.at("dims").get<std::array<std::uint32_t, 3>>();
    g.origin = vec_from(j.at("origin"));
    g.voxel_size = j.at("voxel_size").get<double>();
    g.validate();
    return g;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("grid JSON: ") + e.what());
  }
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_json(const Json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  out.close();
  if (!out) throw FormatError("write to " + path.string() + " failed");
}

}  // namespace gaussocc::io
