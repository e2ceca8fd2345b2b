// Copyright 2026 The tstkit Authors. All Rights Reserved.
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
// =============================================================================

#ifndef TSTKIT_PROMPT_TEMPLATE_HPP
#define TSTKIT_PROMPT_TEMPLATE_HPP

// Prompt wording. Bump kPromptTemplateVersion whenever any string here
// changes; the prompt-forge tests pin the rendered layout.

#include <array>
#include <string_view>

namespace tstkit::prompt_template {

inline constexpr std::string_view kPromptTemplateVersion = "1";

inline constexpr std::array<std::string_view, 4> kDimensionLabels = {
    "Lexis", "Syntax", "Mood", "Semantics"};

inline constexpr std::array<std::string_view, 4> kDescriptivePrompts = {
    "Analyze the lexical variations between the following sentence pairs in terms "
    "of word choice, vocabulary, and stylistic expression.",
    "Examine and compare the syntactic structures of these style transfer sentence "
    "pairs, focusing on sentence construction, grammatical patterns, and syntax "
    "differences.",
    "Evaluate the tone of these texts by comparing their mood, emotional cues, and "
    "overall attitude towards the subject matter.",
    "Analyze the semantic shifts between these sentence pairs, identifying "
    "differences in meaning, context, and interpretation.",
};

inline constexpr std::string_view kPairSeparator = " ||| ";

// "Rewrite the following text from style <s1> to style <s2>, preserving content."
inline constexpr std::string_view kHeaderPrefix = "Rewrite the following text from style ";
inline constexpr std::string_view kHeaderMiddle = " to style ";
inline constexpr std::string_view kHeaderSuffix = ", preserving content.";

inline constexpr std::string_view kInputLabel = "Input: ";
inline constexpr std::string_view kOutputCue = "Output:";

}  // namespace tstkit::prompt_template

#endif  // TSTKIT_PROMPT_TEMPLATE_HPP
