// Copyright 2026 The sloscale Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// One-step-ahead load forecasting from a short window of per-chain arrival
// rates: least-squares autoregression without intercept.

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

namespace sloscale::forecast {

struct Observation {
  std::int64_t tick = 0;
  double arrivals_rps = 0.0;
};

// Bounded window of the most recent observations of one chain.
class LoadHistory {
 public:
  explicit LoadHistory(std::size_t window = 16);

  // Throws Error(kInvalidArgument) unless tick is later than the last one.
  void push(std::int64_t tick, double arrivals_rps);

  std::size_t window() const { return window_; }
  std::size_t size() const { return values_.size(); }
  bool full() const { return values_.size() == window_; }
  std::vector<double> values() const;  // oldest first
  const std::deque<Observation>& observations() const { return values_; }

 private:
  std::size_t window_;
  std::deque<Observation> values_;
};

struct ArModel {
  std::vector<double> coefficients;  // coefficients[j] multiplies the value j+1 steps back
  bool last_value = false;           // fallback: repeat the most recent value
};

// Fits order-p coefficients on the series. Falls back to the last-value
// predictor when there are fewer than p regression rows or the series is all
// zeros.
ArModel fit(std::span<const double> series, int order = 3);
ArModel fit(const LoadHistory& history, int order = 3);

// recent is oldest first and must hold at least order values. Never negative.
double predict(const ArModel& model, std::span<const double> recent);

// Rolling per-chain predictor: refits on the current window every call.
class Forecaster {
 public:
  explicit Forecaster(std::size_t window = 16, int order = 3);

  void observe(std::int64_t tick, double arrivals_rps) { history_.push(tick, arrivals_rps); }
  // Forecast of the next tick. 0 before any observation.
  double forecast() const;
  const LoadHistory& history() const { return history_; }

 private:
  LoadHistory history_;
  int order_;
};

}  // namespace sloscale::forecast
