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

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mapstp/errors.hpp"
#include "mapstp/statefeat.hpp"

using namespace mapstp;
using namespace mapstp::statefeat;
using scenegen::EgoTrack;
using scenegen::Pose;

namespace
{

EgoTrack track(std::vector<double> speeds, std::vector<double> headings, double dt = 0.5)
{
  EgoTrack t;
  t.dt = dt;
  double x = 0.0;
  for (std::size_t i = 0; i < speeds.size(); ++i) {
    t.poses.push_back({dt * static_cast<double>(i), x, 0.0, headings[i], speeds[i]});
    x += speeds[i] * dt;
  }
  return t;
}

}  // namespace

TEST_CASE("steady straight driving")
{
  const StateVector s = compute_state(track({10, 10, 10, 10, 10}, {0, 0, 0, 0, 0}));
  CHECK(s.speed == 10.0);
  CHECK(s.acceleration == 0.0);
  CHECK(s.yaw_rate == 0.0);
}

TEST_CASE("backward differences at dt = 0.5 s")
{
  const StateVector a = compute_state(track({7.5, 8.0, 8.5}, {0, 0, 0}));
  CHECK(a.acceleration == doctest::Approx(1.0));
  CHECK(a.speed == 8.5);
  const StateVector y = compute_state(track({5, 5, 5}, {-0.1, 0.0, 0.1}));
  CHECK(y.yaw_rate == doctest::Approx(0.2));
}

TEST_CASE("yaw rate wraps across +-pi")
{
  const StateVector s = compute_state(track({5, 5, 5}, {3.0, 3.1, -3.1}));
  CHECK(std::abs(s.yaw_rate) == doctest::Approx((2 * std::numbers::pi - 6.2) / 0.5));
  CHECK(s.yaw_rate > 0.0);
}

TEST_CASE("insufficient history")
{
  CHECK_THROWS_AS(compute_state(track({1, 2}, {0, 0})), DataError);
  CHECK_THROWS_AS(compute_state(EgoTrack{}), DataError);
}

TEST_CASE("translation invariance")
{
  EgoTrack t = track({6, 6.5, 7, 7.2}, {0.2, 0.25, 0.31, 0.36});
  const StateVector a = compute_state(t);
  for (auto & p : t.poses) {
    p.x += 1234.5;
    p.y -= 987.25;
  }
  const StateVector b = compute_state(t);
  CHECK(a.speed == b.speed);
  CHECK(a.acceleration == b.acceleration);
  CHECK(a.yaw_rate == b.yaw_rate);
}

TEST_CASE("normalize_state examples")
{
  NormStats stats;
  stats.mean = {5, 0, 0};
  stats.stddev = {5, 1, 0.1};
  const auto z = normalize_state({10, 1, 0.2}, stats);
  CHECK(z.shape() == nn::Shape{3});
  CHECK(z[0] == doctest::Approx(1.0));
  CHECK(z[1] == doctest::Approx(1.0));
  CHECK(z[2] == doctest::Approx(2.0));
  const auto zero = normalize_state({5, 0, 0}, stats);
  CHECK(zero[0] == 0.0);
  CHECK(zero[1] == 0.0);
  CHECK(zero[2] == 0.0);
  const auto id = normalize_state({3, -2, 0.7}, NormStats{});
  CHECK(id[0] == 3.0);
  CHECK(id[1] == -2.0);
  CHECK(id[2] == 0.7);
  stats.stddev[1] = 0.0;
  CHECK_THROWS_AS(normalize_state({1, 1, 1}, stats), ConfigError);
}

TEST_CASE("norm stats from samples")
{
  std::vector<scenegen::Sample> samples(2);
  samples[0].history = track({4, 4, 4}, {0, 0, 0});
  samples[1].history = track({4, 5, 6}, {0, 0, 0});
  const NormStats s = compute_norm_stats(samples);
  CHECK(s.mean[0] == doctest::Approx(5.0));
  CHECK(s.stddev[0] == doctest::Approx(1.0));
  CHECK(s.mean[1] == doctest::Approx(1.0));
  CHECK(s.stddev[1] == doctest::Approx(1.0));
  CHECK(s.mean[2] == 0.0);
  CHECK(s.stddev[2] == 1.0);
}
