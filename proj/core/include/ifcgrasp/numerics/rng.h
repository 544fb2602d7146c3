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

#ifndef IFCGRASP_NUMERICS_RNG_H_
#define IFCGRASP_NUMERICS_RNG_H_

#include <cstdint>

namespace ifcgrasp::num {

// Counter-based generator: the i-th draw of a stream is a pure function of
// (key, i), so streams can be forked per episode or per sample without any
// shared state. Distributions are implemented here rather than taken from
// <random>, whose distribution algorithms are implementation-defined.
class CounterRng {
 public:
  explicit CounterRng(uint64_t seed, uint64_t stream = 0);

  // Independent child stream. Forking does not advance the parent.
  CounterRng Fork(uint64_t stream) const;

  uint64_t NextU64();
  // Uniform on [0, 1) with 53 random bits.
  double Uniform();
  double Uniform(double lo, double hi);
  // Inclusive range.
  int64_t UniformInt(int64_t lo, int64_t hi);
  double Normal();

  uint64_t key() const { return key_; }
  uint64_t counter() const { return counter_; }

 private:
  CounterRng(uint64_t key, uint64_t counter, bool /*raw*/)
      : key_(key), counter_(counter) {}

  uint64_t key_;
  uint64_t counter_ = 0;
};

// SplitMix64 finalizer.
uint64_t Mix64(uint64_t x);

}  // namespace ifcgrasp::num

#endif  // IFCGRASP_NUMERICS_RNG_H_
