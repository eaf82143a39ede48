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

#ifndef MAPSTP__METRICS_HPP_
#define MAPSTP__METRICS_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mapstp/nn/tensor.hpp"

namespace mapstp::model
{
class Network;
struct PreparedSample;
}  // namespace mapstp::model

namespace mapstp::statefeat
{
struct NormStats;
}  // namespace mapstp::statefeat

namespace mapstp::metrics
{

// gt is (T_f, 2); modes is (K', T_f, 2). Shape mismatches throw ShapeError.

/// Minimum over modes of the mean Euclidean displacement.
double min_ade(const nn::Tensor & gt, const nn::Tensor & modes);
/// Minimum over modes of the final-step displacement.
double min_fde(const nn::Tensor & gt, const nn::Tensor & modes);
/// 1 if every mode reaches a displacement >= d at some step, else 0. Throws ConfigError for d <= 0.
int miss_indicator(const nn::Tensor & gt, const nn::Tensor & modes, double d);

/// Indices of the k most probable modes, probability descending, ties to the lower index.
std::vector<std::size_t> top_k(const nn::Tensor & probabilities, std::size_t k);
/// Sub-tensor (indices.size(), T_f, 2) of the listed modes.
nn::Tensor gather_modes(const nn::Tensor & modes, std::span<const std::size_t> indices);

struct MissRate
{
  double d = 0.0;
  double rate = 0.0;
};

struct KEntry
{
  std::size_t k = 0;
  double min_ade = 0.0;
  double min_fde = 0.0;
  std::vector<MissRate> miss;  // one per requested d, in request order
};

struct MetricsReport
{
  std::size_t sample_count = 0;
  std::vector<KEntry> entries;  // one per requested k, in request order

  const KEntry & entry(std::size_t k) const;
  double miss_rate(std::size_t k, double d) const;
};

/// Accumulates per-sample metrics; averages are arithmetic means over samples.
class ReportBuilder
{
public:
  ReportBuilder(std::vector<std::size_t> k_list, std::vector<double> d_list);
  /// modes (K, T_f, 2) and probabilities (K,) of one prediction.
  void add(const nn::Tensor & gt, const nn::Tensor & modes, const nn::Tensor & probabilities);
  MetricsReport finish() const;

private:
  std::vector<std::size_t> k_list_;
  std::vector<double> d_list_;
  std::size_t count_ = 0;
  std::vector<double> ade_;
  std::vector<double> fde_;
  std::vector<double> miss_;  // k-major
};

/**
 * Runs the network on every sample, ranks modes by probability and averages
 * the top-k metrics. Throws ConfigError when some k exceeds K or a list is
 * empty, DataError for an empty split.
 */
MetricsReport evaluate(
  const model::Network & net, const statefeat::NormStats & norm, std::span<const model::PreparedSample> samples,
  const std::vector<std::size_t> & k_list, const std::vector<double> & d_list);

/// Column name of a distance threshold: integral values print without decimals.
std::string format_distance(double d);

/// Aligned text table, one row with columns MinADE_k, MinFDE_k, MissRate_k,d.
std::string format_table(const MetricsReport & report, const std::string & label);
/// JSON object {"minade_k5": ..., "minfde_k5": ..., "missrate_k5_d2": ..., "sample_count": n}.
std::string to_json(const MetricsReport & report);

}  // namespace mapstp::metrics

#endif  // MAPSTP__METRICS_HPP_
