// Copyright 2026 The collapse-lab Authors
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

#pragma once

#include <cstddef>

namespace collapse_lab {

// Every structural check in the library compares against these values and
// reports the measured residual alongside the verdict.
struct Tolerances {
  double hermitian = 1e-10;
  double unitary = 1e-10;
  double projector = 1e-10;
  double norm = 1e-12;
  double psd = 1e-10;
};

inline constexpr Tolerances kTol{};

/// Largest composite dimension any constructor will produce.
inline constexpr std::ptrdiff_t kMaxDim = 4096;

}  // namespace collapse_lab
