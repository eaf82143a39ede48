// Copyright 2026 The MapsTP Authors
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

#include "mapstp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "mapstp/errors.hpp"
#include "mapstp/model.hpp"

namespace mapstp::metrics
{

namespace
{

std::size_t check_shapes(const nn::Tensor & gt, const nn::Tensor & modes, const char * op)
{
  if (gt.rank() != 2 || gt.dim(1) != 2 || modes.rank() != 3 || modes.dim(2) != 2 || modes.dim(1) != gt.dim(0)) {
    throw ShapeError(
      std::string(op) + ": gt " + nn::to_string(gt.shape()) + " incompatible with modes " +
      nn::to_string(modes.shape()));
  }
  return gt.dim(0);
}

double displacement(const nn::Tensor & gt, const nn::Tensor & modes, std::size_t mode, std::size_t t, std::size_t steps)
{
  const std::size_t m = (mode * steps + t) * 2;
  return std::hypot(modes[m] - gt[t * 2], modes[m + 1] - gt[t * 2 + 1]);
}

}  // namespace

double min_ade(const nn::Tensor & gt, const nn::Tensor & modes)
{
  const std::size_t steps = check_shapes(gt, modes, "min_ade");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < modes.dim(0); ++i) {
    double s = 0.0;
    for (std::size_t t = 0; t < steps; ++t) {
      s += displacement(gt, modes, i, t, steps);
    }
    best = std::min(best, s / static_cast<double>(steps));
  }
  return best;
}

double min_fde(const nn::Tensor & gt, const nn::Tensor & modes)
{
  const std::size_t steps = check_shapes(gt, modes, "min_fde");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < modes.dim(0); ++i) {
    best = std::min(best, displacement(gt, modes, i, steps - 1, steps));
  }
  return best;
}

int miss_indicator(const nn::Tensor & gt, const nn::Tensor & modes, double d)
{
  const std::size_t steps = check_shapes(gt, modes, "miss_indicator");
  if (!(d > 0.0)) {
    throw ConfigError("miss_indicator: threshold d must be positive");
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < modes.dim(0); ++i) {
    double worst = 0.0;
    for (std::size_t t = 0; t < steps; ++t) {
      worst = std::max(worst, displacement(gt, modes, i, t, steps));
    }
    best = std::min(best, worst);
  }
  return best >= d ? 1 : 0;
}

std::vector<std::size_t> top_k(const nn::Tensor & probabilities, std::size_t k)
{
  if (k == 0 || k > probabilities.size()) {
    throw ConfigError(
      "top_k: k=" + std::to_string(k) + " outside [1, K=" + std::to_string(probabilities.size()) + "]");
  }
  std::vector<std::size_t> idx(probabilities.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return probabilities[a] > probabilities[b];
  });
  idx.resize(k);
  return idx;
}

nn::Tensor gather_modes(const nn::Tensor & modes, std::span<const std::size_t> indices)
{
  if (modes.rank() != 3 || indices.empty()) {
    throw ShapeError("gather_modes: need (K, T, 2) modes and at least one index, got " + nn::to_string(modes.shape()));
  }
  const std::size_t stride = modes.dim(1) * modes.dim(2);
  std::vector<double> out;
  out.reserve(indices.size() * stride);
  for (const auto i : indices) {
    if (i >= modes.dim(0)) {
      throw ShapeError("gather_modes: index " + std::to_string(i) + " out of range");
    }
    const auto src = modes.data().subspan(i * stride, stride);
    out.insert(out.end(), src.begin(), src.end());
  }
  return nn::Tensor({indices.size(), modes.dim(1), modes.dim(2)}, std::move(out));
}

const KEntry & MetricsReport::entry(std::size_t k) const
{
  for (const auto & e : entries) {
    if (e.k == k) {
      return e;
    }
  }
  throw ConfigError("report has no entry for k=" + std::to_string(k));
}

double MetricsReport::miss_rate(std::size_t k, double d) const
{
  for (const auto & m : entry(k).miss) {
    if (m.d == d) {
      return m.rate;
    }
  }
  throw ConfigError("report has no miss rate for d=" + format_distance(d));
}

ReportBuilder::ReportBuilder(std::vector<std::size_t> k_list, std::vector<double> d_list)
: k_list_(std::move(k_list)), d_list_(std::move(d_list))
{
  if (k_list_.empty() || d_list_.empty()) {
    throw ConfigError("metrics: k and d lists must be nonempty");
  }
  for (const double d : d_list_) {
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw ConfigError("metrics: thresholds d must be positive");
    }
  }
  ade_.assign(k_list_.size(), 0.0);
  fde_.assign(k_list_.size(), 0.0);
  miss_.assign(k_list_.size() * d_list_.size(), 0.0);
}

void ReportBuilder::add(const nn::Tensor & gt, const nn::Tensor & modes, const nn::Tensor & probabilities)
{
  for (std::size_t i = 0; i < k_list_.size(); ++i) {
    const auto top = top_k(probabilities, k_list_[i]);
    const nn::Tensor sub = gather_modes(modes, top);
    ade_[i] += min_ade(gt, sub);
    fde_[i] += min_fde(gt, sub);
    for (std::size_t j = 0; j < d_list_.size(); ++j) {
      miss_[i * d_list_.size() + j] += miss_indicator(gt, sub, d_list_[j]);
    }
  }
  ++count_;
}

MetricsReport ReportBuilder::finish() const
{
  if (count_ == 0) {
    throw DataError("metrics: no samples evaluated");
  }
  const auto n = static_cast<double>(count_);
  MetricsReport report;
  report.sample_count = count_;
  for (std::size_t i = 0; i < k_list_.size(); ++i) {
    KEntry e;
    e.k = k_list_[i];
    e.min_ade = ade_[i] / n;
    e.min_fde = fde_[i] / n;
    for (std::size_t j = 0; j < d_list_.size(); ++j) {
      e.miss.push_back({d_list_[j], miss_[i * d_list_.size() + j] / n});
    }
    report.entries.push_back(std::move(e));
  }
  return report;
}

MetricsReport evaluate(
  const model::Network & net, const statefeat::NormStats & norm, std::span<const model::PreparedSample> samples,
  const std::vector<std::size_t> & k_list, const std::vector<double> & d_list)
{
  if (samples.empty()) {
    throw DataError("evaluate: empty split");
  }
  const std::size_t modes = net.config().num_modes;
  for (const auto k : k_list) {
    if (k == 0 || k > modes) {
      throw ConfigError("evaluate: k=" + std::to_string(k) + " exceeds the model's K=" + std::to_string(modes));
    }
  }
  ReportBuilder builder(k_list, d_list);
  std::vector<model::TrajectoryPrediction> preds(samples.size());
  std::vector<std::exception_ptr> errors(samples.size());
  const auto n = static_cast<std::ptrdiff_t>(samples.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    try {
      preds[i] = net.predict(samples[i].raster, statefeat::normalize_state(samples[i].state, norm));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto & e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    builder.add(samples[i].future, preds[i].modes, preds[i].probabilities);
  }
  return builder.finish();
}

std::string format_distance(double d)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", d);
  return buf;
}

std::string format_table(const MetricsReport & report, const std::string & label)
{
  std::vector<std::string> header{"Method"};
  std::vector<std::string> row{label};
  auto cell = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return std::string(buf);
  };
  for (const auto & e : report.entries) {
    header.push_back("MinADE_" + std::to_string(e.k));
    row.push_back(cell(e.min_ade));
  }
  for (const auto & e : report.entries) {
    header.push_back("MinFDE_" + std::to_string(e.k));
    row.push_back(cell(e.min_fde));
  }
  for (const auto & e : report.entries) {
    for (const auto & m : e.miss) {
      header.push_back("MissRate_" + std::to_string(e.k) + "," + format_distance(m.d));
      row.push_back(cell(m.rate));
    }
  }
  std::string top;
  std::string bottom;
  std::string rule;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::size_t w = std::max(header[i].size(), row[i].size());
    const std::string sep = i == 0 ? "" : "  ";
    top += sep + header[i] + std::string(w - header[i].size(), ' ');
    bottom += sep + std::string(w - row[i].size(), ' ') + row[i];
    rule += sep + std::string(w, '-');
  }
  auto rtrim = [](std::string s) {
    while (!s.empty() && s.back() == ' ') {
      s.pop_back();
    }
    return s;
  };
  return rtrim(top) + "\n" + rule + "\n" + rtrim(bottom) + "\n" + "samples: " + std::to_string(report.sample_count) + "\n";
}

std::string to_json(const MetricsReport & report)
{
  nlohmann::ordered_json j;
  for (const auto & e : report.entries) {
    j["minade_k" + std::to_string(e.k)] = e.min_ade;
  }
  for (const auto & e : report.entries) {
    j["minfde_k" + std::to_string(e.k)] = e.min_fde;
  }
  for (const auto & e : report.entries) {
    for (const auto & m : e.miss) {
      j["missrate_k" + std::to_string(e.k) + "_d" + format_distance(m.d)] = m.rate;
    }
  }
  j["sample_count"] = report.sample_count;
  return j.dump(2) + "\n";
}

}  // namespace mapstp::metrics
