// Copyright 2026 The itericl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ITERICL_SEEDING_H_
#define ITERICL_SEEDING_H_

#include <cstdint>
#include <string_view>

namespace itericl {

// Deterministic seed derivation. Results depend only on the arguments, never
// on process state, so per-query and per-partition streams are reproducible
// regardless of scheduling or worker count.
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t index);
std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view key);

}  // namespace itericl

#endif  // ITERICL_SEEDING_H_
