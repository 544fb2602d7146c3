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

#ifndef IFCGRASP_POLICY_AGGREGATION_H_
#define IFCGRASP_POLICY_AGGREGATION_H_

#include <cstdint>
#include <deque>
#include <vector>

#include "ifcgrasp/numerics/array.h"

namespace ifcgrasp::policy {

// w_i = exp(-m * i) / sum_j exp(-m * j), i = 0 is the newest prediction.
std::vector<double> AggregationWeights(int count, double m);

// Weighted mean of predictions ordered newest first.
std::vector<double> TemporalAggregate(
    const std::vector<std::vector<double>>& newest_first, double m);

// Recent action chunks keyed by the step at which they were emitted. Chunk
// emitted at step e with length k covers steps e .. e + k - 1.
class ChunkBuffer {
 public:
  ChunkBuffer(int chunk, int action_dim);

  // chunk: [k, D]. Emission steps must strictly increase, so at most k
  // chunks overlap any step.
  void Add(int64_t step, const num::Array<double>& chunk);

  // All predictions for step t, newest first.
  std::vector<std::vector<double>> PredictionsFor(int64_t t) const;

  // Throws InvariantError when no chunk covers t.
  std::vector<double> Aggregate(int64_t t, double m) const;

  size_t size() const { return chunks_.size(); }

 private:
  struct Entry {
    int64_t step;
    num::Array<double> actions;
  };
  int chunk_;
  int action_dim_;
  std::deque<Entry> chunks_;
};

}  // namespace ifcgrasp::policy

#endif  // IFCGRASP_POLICY_AGGREGATION_H_
