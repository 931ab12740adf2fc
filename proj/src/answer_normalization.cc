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

#include "itericl/answer_normalization.h"

#include <cctype>

namespace itericl {
namespace {

bool IsSpace(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool IsPunct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::optional<char> ExtractOptionLetter(std::string_view answer) {
  for (std::size_t i = 0; i + 2 < answer.size(); ++i) {
    const char letter = answer[i + 1];
    if (answer[i] == '(' && answer[i + 2] == ')' &&
        std::isalpha(static_cast<unsigned char>(letter))) {
      return static_cast<char>(std::tolower(static_cast<unsigned char>(letter)));
    }
  }
  return std::nullopt;
}

std::string NormalizeAnswer(std::string_view answer,
                            const NormalizationOptions& options) {
  if (options.extract_option_letter) {
    if (auto letter = ExtractOptionLetter(answer)) return std::string(1, *letter);
  }
  std::string out;
  out.reserve(answer.size());
  bool pending_space = false;
  for (char c : answer) {
    if (IsSpace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  while (!out.empty() && (IsPunct(out.back()) || IsSpace(out.back()))) {
    out.pop_back();
  }
  return out;
}

}  // namespace itericl
