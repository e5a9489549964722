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

#include "gaussocc/attention.hpp"

#include <algorithm>
#include <cmath>
#include <array>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include "gaussocc/errors.hpp"
#include "gaussocc/random.hpp"
#include "json.hpp"

namespace gaussocc::attention {
namespace {

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

bool has_nan(const Matrix& m) { return m.hasNaN(); }

// Lexicographic order over the concatenated (key, value) rows.
std::vector<Eigen::Index> canonical_key_order(const Matrix& k, const Matrix& v) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index c = 0; c < k.cols(); ++c) {
      if (k(a, c) != k(b, c)) return k(a, c) < k(b, c);
    }
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
      if (v(a, c) != v(b, c)) return v(a, c) < v(b, c);
    }
    return false;
  });
  return order;
}

double dot_row(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index c = 0; c < a.cols(); ++c) s += a(i, c) * b(j, c);
  return s;
}

}  // namespace

void TokenSet::validate() const {
  if (views.empty()) throw ShapeError("token set has no views");
  const auto rows = views.front().rows();
  const auto cols = views.front().cols();
  for (const auto& v : views) {
    if (v.rows() != rows || v.cols() != cols) {
      throw ShapeError("inconsistent per-view token shapes: " + shape_str(v) + " vs " +
                       std::to_string(rows) + "x" + std::to_string(cols));
    }
  }
  if (rows < static_cast<Eigen::Index>(num_registers)) {
    throw ShapeError("more register tokens than tokens per view");
  }
}

void ProjectionWeights::validate() const {
  if (query.rows() != key.rows() || query.rows() != value.rows()) {
    throw ShapeError("projection input dims differ across Q/K/V");
  }
  if (query.cols() != key.cols() || query.cols() != value.cols() || query.cols() == 0) {
    throw ShapeError("projection inner dim d_k differs across Q/K/V");
  }
}

AttentionWeights AttentionWeights::random(Eigen::Index c_tok, Eigen::Index d_k, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(c_tok));
  auto draw = [&] {
    Matrix m(c_tok, d_k);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
    return m;
  };
  AttentionWeights w;
  w.in_frame.query = draw();
  w.in_frame.key = draw();
  w.in_frame.value = draw();
  w.cross_frame.query = draw();
  w.cross_frame.key = draw();
  w.cross_frame.value = draw();
  return w;
}

Matrix project(const Matrix& tokens, const Matrix& weights) {
  if (tokens.cols() != weights.rows()) {
    throw ShapeError("cannot project " + shape_str(tokens) + " tokens with " + shape_str(weights) +
                     " weights");
  }
  Matrix out(tokens.rows(), weights.cols());
  for (Eigen::Index i = 0; i < tokens.rows(); ++i) {
    for (Eigen::Index j = 0; j < weights.cols(); ++j) {
      double s = 0.0;
      for (Eigen::Index c = 0; c < tokens.cols(); ++c) s += tokens(i, c) * weights(c, j);
      out(i, j) = s;
    }
  }
  return out;
}

Matrix attention_probabilities(const Matrix& q, const Matrix& k) {
  if (q.cols() != k.cols() || q.cols() == 0) {
    throw ShapeError("query " + shape_str(q) + " and key " + shape_str(k) + " disagree on d_k");
  }
  if (k.rows() == 0) throw ShapeError("attention needs at least one key");
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  Matrix p(q.rows(), k.rows());
  for (Eigen::Index m = 0; m < q.rows(); ++m) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < k.rows(); ++j) {
      p(m, j) = dot_row(q, m, k, j) * inv_sqrt_dk;
      mx = std::max(mx, p(m, j));
    }
    double sum = 0.0;
    for (Eigen::Index j = 0; j < k.rows(); ++j) {
      p(m, j) = std::exp(p(m, j) - mx);
      sum += p(m, j);
    }
    p.row(m) /= sum;
  }
  return p;
}

Matrix scaled_dot_attention(const Matrix& q, const Matrix& k, const Matrix& v) {
  if (q.cols() != k.cols() || q.cols() == 0) {
    throw ShapeError("query " + shape_str(q) + " and key " + shape_str(k) + " disagree on d_k");
  }
  if (k.rows() != v.rows()) {
    throw ShapeError("key " + shape_str(k) + " and value " + shape_str(v) + " row counts differ");
  }
  if (k.rows() == 0) throw ShapeError("attention needs at least one key");
  if (has_nan(q) || has_nan(k) || has_nan(v)) throw DomainError("NaN in attention input");

  const auto order = canonical_key_order(k, v);
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  const auto n_keys = static_cast<std::size_t>(k.rows());
  Matrix out(q.rows(), v.cols());

#pragma omp parallel
  {
    std::vector<double> weight(n_keys);
#pragma omp for schedule(static)
    for (Eigen::Index m = 0; m < q.rows(); ++m) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t t = 0; t < n_keys; ++t) {
        weight[t] = dot_row(q, m, k, order[t]) * inv_sqrt_dk;
        mx = std::max(mx, weight[t]);
      }
      double sum = 0.0;
      for (std::size_t t = 0; t < n_keys; ++t) {
        weight[t] = std::exp(weight[t] - mx);
        sum += weight[t];
      }
      for (Eigen::Index c = 0; c < v.cols(); ++c) {
        double acc = 0.0;
        for (std::size_t t = 0; t < n_keys; ++t) acc += (weight[t] / sum) * v(order[t], c);
        out(m, c) = acc;
      }
    }
  }
  return out;
}

std::vector<Matrix> in_frame_pass(const TokenSet& tokens, const ProjectionWeights& weights) {
  tokens.validate();
  weights.validate();
  const auto n = static_cast<std::ptrdiff_t>(tokens.views.size());
  std::vector<Matrix> out(tokens.views.size());
  // Views are independent; the inner attention runs serially per view here.
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Matrix& t = tokens.views[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = scaled_dot_attention(
        project(t, weights.query), project(t, weights.key), project(t, weights.value));
  }
  return out;
}

std::vector<Matrix> cross_frame_pass(const std::vector<Matrix>& views, const ProjectionWeights& weights) {
  weights.validate();
  if (views.empty()) throw ShapeError("cross-frame pass needs at least one view");
  const auto rows = views.front().rows();
  Matrix all(rows * static_cast<Eigen::Index>(views.size()), views.front().cols());
  for (std::size_t i = 0; i < views.size(); ++i) {
    if (views[i].rows() != rows || views[i].cols() != all.cols()) {
      throw ShapeError("inconsistent per-view token shapes in cross-frame pass");
    }
    all.middleRows(static_cast<Eigen::Index>(i) * rows, rows) = views[i];
  }
  const Matrix fused = scaled_dot_attention(project(all, weights.query), project(all, weights.key),
                                            project(all, weights.value));
  std::vector<Matrix> out(views.size());
  for (std::size_t i = 0; i < views.size(); ++i) {
    out[i] = fused.middleRows(static_cast<Eigen::Index>(i) * rows, rows);
  }
  return out;
}

TokenSet alternating_block(const TokenSet& tokens, const AttentionWeights& weights) {
  tokens.validate();
  for (const auto* stage : {&weights.in_frame, &weights.cross_frame}) {
    stage->validate();
    if (stage->query.rows() != tokens.channels() || stage->inner_dim() != tokens.channels()) {
      throw ShapeError("alternating block needs C_tok x C_tok projections to preserve token shape");
    }
  }
  TokenSet out;
  out.num_registers = tokens.num_registers;
  out.views = cross_frame_pass(in_frame_pass(tokens, weights.in_frame), weights.cross_frame);
  return out;
}

namespace {

constexpr const char* kMatrixNames[3] = {"W_q", "W_k", "W_v"};
constexpr const char* kStageNames[2] = {"in_frame", "cross_frame"};

std::array<Matrix*, 3> stage_mats(ProjectionWeights& p) { return {&p.query, &p.key, &p.value}; }

}  // namespace

void save_weights(const AttentionWeights& weights, const std::filesystem::path& stem) {
  AttentionWeights w = weights;
  std::array<ProjectionWeights*, 2> stages{&w.in_frame, &w.cross_frame};
  nlohmann::json meta;
  meta["format"] = "attention-weights-f32";
  meta["stages"] = nlohmann::json::array();
  std::vector<float> flat;
  for (std::size_t s = 0; s < 2; ++s) {
    nlohmann::json stage;
    stage["label"] = kStageNames[s];
    auto mats = stage_mats(*stages[s]);
    for (std::size_t m = 0; m < 3; ++m) {
      stage["matrices"].push_back({{"name", kMatrixNames[m]},
                                   {"rows", mats[m]->rows()},
                                   {"cols", mats[m]->cols()},
                                   {"offset", flat.size()}});
      for (Eigen::Index i = 0; i < mats[m]->size(); ++i) {
        flat.push_back(static_cast<float>(mats[m]->data()[i]));
      }
    }
    meta["stages"].push_back(stage);
  }
  meta["num_floats"] = flat.size();

  auto bin_path = stem;
  bin_path += ".bin";
  auto json_path = stem;
  json_path += ".json";
  std::ofstream bin(bin_path, std::ios::binary);
  bin.write(reinterpret_cast<const char*>(flat.data()),
            static_cast<std::streamsize>(flat.size() * sizeof(float)));
  std::ofstream js(json_path);
  js << meta.dump(2) << '\n';
  if (!bin || !js) throw Error("failed to write attention weights to " + stem.string());
}

AttentionWeights load_weights(const std::filesystem::path& stem) {
  auto bin_path = stem;
  bin_path += ".bin";
  auto json_path = stem;
  json_path += ".json";
  std::ifstream js(json_path);
  if (!js) throw ConfigError("cannot open " + json_path.string());
  const auto meta = nlohmann::json::parse(js);

  std::ifstream bin(bin_path, std::ios::binary | std::ios::ate);
  if (!bin) throw ConfigError("cannot open " + bin_path.string());
  const auto bytes = static_cast<std::size_t>(bin.tellg());
  if (bytes % sizeof(float) != 0) throw FormatError("weight file size is not a multiple of 4");
  std::vector<float> flat(bytes / sizeof(float));
  bin.seekg(0);
  bin.read(reinterpret_cast<char*>(flat.data()), static_cast<std::streamsize>(bytes));

  AttentionWeights w;
  for (const auto& stage : meta.at("stages")) {
    const auto label = stage.at("label").get<std::string>();
    ProjectionWeights* target = nullptr;
    if (label == kStageNames[0]) target = &w.in_frame;
    else if (label == kStageNames[1]) target = &w.cross_frame;
    else throw FormatError("unknown attention stage label '" + label + "'");
    auto mats = stage_mats(*target);
    for (const auto& m : stage.at("matrices")) {
      const auto name = m.at("name").get<std::string>();
      const auto it = std::find_if(std::begin(kMatrixNames), std::end(kMatrixNames),
                                   [&](const char* n) { return name == n; });
      if (it == std::end(kMatrixNames)) throw FormatError("unknown matrix name '" + name + "'");
      const auto rows = m.at("rows").get<Eigen::Index>();
      const auto cols = m.at("cols").get<Eigen::Index>();
      const auto offset = m.at("offset").get<std::size_t>();
      if (offset + static_cast<std::size_t>(rows * cols) > flat.size()) {
        throw FormatError("matrix " + name + " extends past the end of the weight file");
      }
      Matrix& dst = *mats[static_cast<std::size_t>(it - std::begin(kMatrixNames))];
      dst.resize(rows, cols);
      for (Eigen::Index i = 0; i < dst.size(); ++i) dst.data()[i] = flat[offset + static_cast<std::size_t>(i)];
    }
  }
  w.in_frame.validate();
  w.cross_frame.validate();
  return w;
}

}  // namespace gaussocc::attention
