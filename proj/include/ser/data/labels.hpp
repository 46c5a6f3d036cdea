// Copyright 2026 The ser-forge Authors.
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

#include <array>
#include <string>
#include <string_view>

namespace ser::data {

// Class ids follow the order angry, sadness, happiness, neutral.
inline constexpr int kNumClasses = 4;
inline constexpr std::array<std::string_view, kNumClasses> kClassNames{"angry", "sadness", "happiness", "neutral"};

std::string_view class_name(int label);

// Case-insensitive. "excited" (and the corpus short codes ang/sad/hap/exc/neu)
// are accepted; excited maps to happiness. Throws InvalidInput otherwise.
int parse_label(std::string_view text);

}  // namespace ser::data
