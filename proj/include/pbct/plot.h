// Copyright 2026 The PBCT Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Static SVG figures built from exported data files, and the 2-D
// reductions used for embedding scatter plots.

#ifndef PBCT_PLOT_H_
#define PBCT_PLOT_H_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace pbct {

using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Projection onto the two leading principal axes; signs fixed so the
// largest-magnitude loading of each axis is positive.
PointMatrix Pca2(const PointMatrix& x);

struct TsneOptions {
  double perplexity = 30.0;
  int iterations = 500;
  double learning_rate = 200.0;
  uint64_t seed = 0;
};

// Exact O(n^2) t-SNE to two dimensions.
PointMatrix Tsne2(const PointMatrix& x, const TsneOptions& options = {});

struct ScatterPoint {
  double x = 0.0;
  double y = 0.0;
  std::string group;
  bool hollow = false;  // drawn as a ring
};

std::string ScatterSvg(const std::vector<ScatterPoint>& points, const std::string& title);

struct Bar {
  std::string label;
  double value = 0.0;
};

// Bars grow up or down from zero.
std::string BarSvg(const std::vector<Bar>& bars, const std::string& title,
                   const std::string& y_label);

struct Series {
  std::string name;
  std::vector<double> y;
};

std::string LineSvg(const std::vector<double>& x, const std::vector<Series>& series,
                    const std::string& title, const std::string& x_label);

void WriteText(const std::string& path, const std::string& content);

}  // namespace pbct

#endif  // PBCT_PLOT_H_
