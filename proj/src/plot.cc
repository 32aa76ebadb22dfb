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

#include "pbct/plot.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include "pbct/status.h"

namespace pbct {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kMargin = 60.0;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string Header(const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + Num(kWidth) + "\" height=\"" +
         Num(kHeight) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n"
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
         "<text x=\"" +
         Num(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" + Escape(title) +
         "</text>\n";
}

struct Range {
  double lo, hi;
  double Map(double v, double a, double b) const {
    double t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
    return a + t * (b - a);
  }
};

Range RangeOf(const std::vector<double>& v, bool include_zero) {
  Range r{include_zero ? 0.0 : INFINITY, include_zero ? 0.0 : -INFINITY};
  for (double x : v) r.lo = std::min(r.lo, x), r.hi = std::max(r.hi, x);
  if (!std::isfinite(r.lo)) r = {0.0, 1.0};
  double pad = (r.hi - r.lo) * 0.05;
  if (pad == 0.0) pad = 0.5;
  return {r.lo - pad, r.hi + pad};
}

std::string Axes(const Range& y) {
  std::string s = "<line x1=\"" + Num(kMargin) + "\" y1=\"" + Num(kHeight - kMargin) + "\" x2=\"" +
                  Num(kWidth - kMargin / 2) + "\" y2=\"" + Num(kHeight - kMargin) +
                  "\" stroke=\"black\"/>\n"
                  "<line x1=\"" +
                  Num(kMargin) + "\" y1=\"" + Num(kMargin) + "\" x2=\"" + Num(kMargin) +
                  "\" y2=\"" + Num(kHeight - kMargin) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    double v = y.lo + (y.hi - y.lo) * i / 4.0;
    double py = y.Map(v, kHeight - kMargin, kMargin);
    s += "<text x=\"" + Num(kMargin - 6) + "\" y=\"" + Num(py + 4) + "\" text-anchor=\"end\">" +
         Num(v) + "</text>\n";
  }
  return s;
}

}  // namespace

PointMatrix Pca2(const PointMatrix& x) {
  const Eigen::Index n = x.rows();
  PointMatrix out = PointMatrix::Zero(n, 2);
  if (n == 0) return out;
  PointMatrix centered = x.rowwise() - x.colwise().mean();
  Eigen::MatrixXd cov = centered.transpose() * centered;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::Index d = cov.rows();
  for (int k = 0; k < 2 && k < d; ++k) {
    Eigen::VectorXd axis = eig.eigenvectors().col(d - 1 - k);
    Eigen::Index arg;
    axis.cwiseAbs().maxCoeff(&arg);
    if (axis(arg) < 0) axis = -axis;
    out.col(k) = centered * axis;
  }
  return out;
}

PointMatrix Tsne2(const PointMatrix& x, const TsneOptions& options) {
  const Eigen::Index n = x.rows();
  PointMatrix y = PointMatrix::Zero(n, 2);
  if (n < 2) return y;
  Eigen::MatrixXd d2(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) d2(i, j) = (x.row(i) - x.row(j)).squaredNorm();

  // Per-point bandwidth by bisection on the entropy.
  const double target = std::log(std::min(options.perplexity, (n - 1) / 3.0 + 1.0));
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double lo = 0.0, hi = INFINITY, beta = 1.0;
    for (int it = 0; it < 64; ++it) {
      double sum = 0.0, hsum = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        double v = std::exp(-beta * d2(i, j));
        p(i, j) = v;
        sum += v;
        hsum += beta * d2(i, j) * v;
      }
      if (sum <= 0.0) sum = 1e-300;
      double h = std::log(sum) + hsum / sum;
      for (Eigen::Index j = 0; j < n; ++j) p(i, j) /= sum;
      if (std::abs(h - target) < 1e-6) break;
      if (h > target) {
        lo = beta;
        beta = std::isfinite(hi) ? (beta + hi) / 2 : beta * 2;
      } else {
        hi = beta;
        beta = (beta + lo) / 2;
      }
    }
  }
  Eigen::MatrixXd pj = (p + p.transpose()) / (2.0 * n);
  pj = pj.cwiseMax(1e-12);

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss(0.0, 1e-4);
  for (Eigen::Index i = 0; i < n; ++i) y(i, 0) = gauss(rng), y(i, 1) = gauss(rng);
  PointMatrix velocity = PointMatrix::Zero(n, 2);
  PointMatrix gains = PointMatrix::Ones(n, 2);
  Eigen::MatrixXd q(n, n);
  for (int it = 0; it < options.iterations; ++it) {
    const double exaggeration = it < 100 ? 4.0 : 1.0;
    const double momentum = it < 250 ? 0.5 : 0.8;
    double qsum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        q(i, j) = i == j ? 0.0 : 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
        qsum += q(i, j);
      }
    PointMatrix grad = PointMatrix::Zero(n, 2);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j) continue;
        double w = (exaggeration * pj(i, j) - std::max(q(i, j) / qsum, 1e-12)) * q(i, j);
        grad.row(i) += 4.0 * w * (y.row(i) - y.row(j));
      }
    for (Eigen::Index i = 0; i < n; ++i)
      for (int k = 0; k < 2; ++k) {
        bool same = (grad(i, k) > 0) == (velocity(i, k) > 0);
        gains(i, k) = std::max(0.01, same ? gains(i, k) * 0.8 : gains(i, k) + 0.2);
        velocity(i, k) =
            momentum * velocity(i, k) - options.learning_rate * gains(i, k) * grad(i, k);
        y(i, k) += velocity(i, k);
      }
    y = y.rowwise() - y.colwise().mean();
  }
  return y;
}

std::string ScatterSvg(const std::vector<ScatterPoint>& points, const std::string& title) {
  std::vector<double> xs, ys;
  std::map<std::string, int> colors;
  for (const ScatterPoint& p : points) {
    xs.push_back(p.x);
    ys.push_back(p.y);
    colors.emplace(p.group, 0);
  }
  int c = 0;
  for (auto& [group, index] : colors) index = c++;
  Range rx = RangeOf(xs, false), ry = RangeOf(ys, false);
  std::string s = Header(title);
  for (const ScatterPoint& p : points) {
    const char* color = kPalette[colors[p.group] % 10];
    s += "<circle cx=\"" + Num(rx.Map(p.x, kMargin, kWidth - 160)) + "\" cy=\"" +
         Num(ry.Map(p.y, kHeight - kMargin, kMargin)) + "\" r=\"3\" " +
         (p.hollow ? std::string("fill=\"none\" stroke=\"") + color + "\""
                   : std::string("fill=\"") + color + "\"") +
         "/>\n";
  }
  double ly = kMargin;
  for (const auto& [group, index] : colors) {
    s += "<circle cx=\"" + Num(kWidth - 140) + "\" cy=\"" + Num(ly) + "\" r=\"4\" fill=\"" +
         kPalette[index % 10] + "\"/>\n<text x=\"" + Num(kWidth - 130) + "\" y=\"" + Num(ly + 4) +
         "\">" + Escape(group) + "</text>\n";
    ly += 16;
  }
  return s + "</svg>\n";
}

std::string BarSvg(const std::vector<Bar>& bars, const std::string& title,
                   const std::string& y_label) {
  std::vector<double> values;
  for (const Bar& b : bars) values.push_back(b.value);
  Range ry = RangeOf(values, true);
  std::string s = Header(title) + Axes(ry);
  s += "<text x=\"16\" y=\"" + Num(kHeight / 2) + "\" transform=\"rotate(-90 16 " +
       Num(kHeight / 2) + ")\" text-anchor=\"middle\">" + Escape(y_label) + "</text>\n";
  const double slot = (kWidth - 1.5 * kMargin) / std::max<size_t>(1, bars.size());
  const double zero = ry.Map(0.0, kHeight - kMargin, kMargin);
  for (size_t i = 0; i < bars.size(); ++i) {
    double top = ry.Map(bars[i].value, kHeight - kMargin, kMargin);
    double x = kMargin + slot * static_cast<double>(i) + slot * 0.15;
    s += "<rect x=\"" + Num(x) + "\" y=\"" + Num(std::min(top, zero)) + "\" width=\"" +
         Num(slot * 0.7) + "\" height=\"" + Num(std::abs(zero - top)) + "\" fill=\"" +
         (bars[i].value >= 0 ? kPalette[0] : kPalette[3]) + "\"/>\n";
    s += "<text x=\"" + Num(x + slot * 0.35) + "\" y=\"" + Num(kHeight - kMargin + 14) +
         "\" text-anchor=\"middle\" font-size=\"9\">" + Escape(bars[i].label) + "</text>\n";
  }
  return s + "</svg>\n";
}

std::string LineSvg(const std::vector<double>& x, const std::vector<Series>& series,
                    const std::string& title, const std::string& x_label) {
  std::vector<double> all;
  for (const Series& sr : series) all.insert(all.end(), sr.y.begin(), sr.y.end());
  Range rx = RangeOf(x, false), ry = RangeOf(all, false);
  std::string s = Header(title) + Axes(ry);
  s += "<text x=\"" + Num(kWidth / 2) + "\" y=\"" + Num(kHeight - 16) +
       "\" text-anchor=\"middle\">" + Escape(x_label) + "</text>\n";
  for (double v : x) {
    s += "<text x=\"" + Num(rx.Map(v, kMargin, kWidth - 160)) + "\" y=\"" +
         Num(kHeight - kMargin + 14) + "\" text-anchor=\"middle\">" + Num(v) + "</text>\n";
  }
  for (size_t k = 0; k < series.size(); ++k) {
    const char* color = kPalette[k % 10];
    std::string pts;
    for (size_t i = 0; i < x.size() && i < series[k].y.size(); ++i) {
      pts += Num(rx.Map(x[i], kMargin, kWidth - 160)) + "," +
             Num(ry.Map(series[k].y[i], kHeight - kMargin, kMargin)) + " ";
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
         "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
    s += "<text x=\"" + Num(kWidth - 140) + "\" y=\"" + Num(kMargin + 16.0 * k) + "\" fill=\"" +
         color + "\">" + Escape(series[k].name) + "</text>\n";
  }
  return s + "</svg>\n";
}

void WriteText(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot write " + path);
  os << content;
  if (!os) throw ConfigError("failed writing " + path);
}

}  // namespace pbct
