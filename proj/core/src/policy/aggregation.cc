// Copyright 2026 The ifcgrasp Authors
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

#include "ifcgrasp/policy/aggregation.h"

#include <cmath>
#include <string>

#include "ifcgrasp/errors.h"

namespace ifcgrasp::policy {

std::vector<double> AggregationWeights(int count, double m) {
  if (count < 1) throw InvariantError("aggregation needs at least one prediction");
  if (!(m >= 0.0)) throw ConfigError("aggregation constant must be >= 0");
  std::vector<double> w(count);
  double total = 0;
  for (int i = 0; i < count; ++i) total += (w[i] = std::exp(-m * i));
  for (double& x : w) x /= total;
  return w;
}

std::vector<double> TemporalAggregate(
    const std::vector<std::vector<double>>& newest_first, double m) {
  const std::vector<double> w =
      AggregationWeights(static_cast<int>(newest_first.size()), m);
  std::vector<double> out(newest_first.front().size(), 0.0);
  for (size_t i = 0; i < newest_first.size(); ++i) {
    if (newest_first[i].size() != out.size()) {
      throw ShapeError("aggregated predictions differ in dimension");
    }
    for (size_t d = 0; d < out.size(); ++d) out[d] += w[i] * newest_first[i][d];
  }
  return out;
}

ChunkBuffer::ChunkBuffer(int chunk, int action_dim)
    : chunk_(chunk), action_dim_(action_dim) {
  if (chunk < 1 || action_dim < 1) throw ConfigError("bad chunk buffer shape");
}

void ChunkBuffer::Add(int64_t step, const num::Array<double>& chunk) {
  if (chunk.shape() != num::Shape{chunk_, action_dim_}) {
    throw ShapeError("chunk buffer expects [" + std::to_string(chunk_) + ", " +
                     std::to_string(action_dim_) + "], got " +
                     num::ShapeString(chunk.shape()));
  }
  if (!chunks_.empty() && step <= chunks_.back().step) {
    throw InvariantError("chunk emission steps must increase");
  }
  chunks_.push_back({step, chunk});
  while (!chunks_.empty() && chunks_.front().step + chunk_ <= step) {
    chunks_.pop_front();
  }
}

std::vector<std::vector<double>> ChunkBuffer::PredictionsFor(int64_t t) const {
  std::vector<std::vector<double>> out;
  for (auto it = chunks_.rbegin(); it != chunks_.rend(); ++it) {
    const int64_t offset = t - it->step;
    if (offset < 0 || offset >= chunk_) continue;
    std::vector<double> a(action_dim_);
    for (int d = 0; d < action_dim_; ++d) {
      a[d] = it->actions.at(static_cast<int>(offset), d);
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<double> ChunkBuffer::Aggregate(int64_t t, double m) const {
  std::vector<std::vector<double>> preds = PredictionsFor(t);
  if (preds.empty()) {
    throw InvariantError("no buffered chunk covers step " + std::to_string(t));
  }
  return TemporalAggregate(preds, m);
}

}  // namespace ifcgrasp::policy
