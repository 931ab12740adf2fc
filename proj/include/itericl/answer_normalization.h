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

#ifndef ITERICL_ANSWER_NORMALIZATION_H_
#define ITERICL_ANSWER_NORMALIZATION_H_

#include <optional>
#include <string>
#include <string_view>

namespace itericl {

struct NormalizationOptions {
  // Reduce "(X)"-style multiple-choice answers to the option letter.
  bool extract_option_letter = true;
};

// Case-folds (ASCII), trims, collapses internal whitespace and strips
// terminal punctuation. With extract_option_letter, an answer containing
// "(X)" for a single letter X becomes "x".
std::string NormalizeAnswer(std::string_view answer,
                            const NormalizationOptions& options = {});

// First "(X)" option letter in `answer`, lowercased.
std::optional<char> ExtractOptionLetter(std::string_view answer);

}  // namespace itericl

#endif  // ITERICL_ANSWER_NORMALIZATION_H_
