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

#pragma once

#include <filesystem>
#include <vector>

#include "gaussocc/core.hpp"
#include "gaussocc/metrics.hpp"
#include "gaussocc/objectives.hpp"
#include "gaussocc/synth.hpp"
#include "json.hpp"

namespace gaussocc::io {

using Json = nlohmann::json;

// All binary formats are little-endian.

// "GSB1\0\0\0\0", u32 P, u32 C, P records of (3 + 3 + 4 + 1 + C) f32, then P
// provenance triples of u32.
void write_gsb(const GaussianSet& gs, const std::filesystem::path& path);
GaussianSet read_gsb(const std::filesystem::path& path);

// u32 H, u32 W, H*W f32 depths, H*W f32 uncertainties. No-return is +inf.
void write_dpm(const DepthMap& map, const std::filesystem::path& path);
DepthMap read_dpm(const std::filesystem::path& path);

struct OccFile {
  OccupancyGrid grid;
  std::vector<float> probs;  // empty unless the file carries the probability dump
};

// u32 X, Y, Z; f32 origin x3; f32 voxel_size; u32 C (the empty id); u8 labels;
// optionally X*Y*Z*(C+1) f32 occupancy probabilities.
void write_occ(const OccupancyGrid& grid, const std::filesystem::path& path,
               const std::vector<float>* probs = nullptr);
OccFile read_occ(const std::filesystem::path& path);

Json to_json(const SceneSpec& scene);
SceneSpec scene_from_json(const Json& j);
Json to_json(const SceneConfig& config);
SceneConfig scene_config_from_json(const Json& j, SceneConfig defaults = {});
Json to_json(const CameraModel& cam);
CameraModel camera_from_json(const Json& j);
Json cameras_to_json(const std::vector<CameraModel>& cams);
std::vector<CameraModel> cameras_from_json(const Json& j);
Json to_json(const GaussianSet& gs);
Json to_json(const MetricReport& report);
Json to_json(const LossReport& report);
Json to_json(const GridGeometry& g);
GridGeometry geometry_from_json(const Json& j);

Json read_json(const std::filesystem::path& path);
// Two-space indented, trailing newline.
void write_json(const Json& j, const std::filesystem::path& path);

}  // namespace gaussocc::io
