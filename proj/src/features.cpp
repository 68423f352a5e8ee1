// Copyright 2026 The repjudge Authors.
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

#include "repjudge/features.hpp"

namespace repjudge {

void KinematicFeatures::set(const std::string& key, FeatureKind kind, double value) {
  entries_[key] = Feature{kind, value, {}};
}

void KinematicFeatures::set_unavailable(const std::string& key, FeatureKind kind,
                                        const std::string& missing_joint) {
  entries_[key] = Feature{kind, std::nullopt, missing_joint};
}

const Feature* KinematicFeatures::find(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::size_t KinematicFeatures::available_count() const {
  std::size_t n = 0;
  for (const auto& [key, feature] : entries_) n += feature.available() ? 1 : 0;
  return n;
}

}  // namespace repjudge
