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

#ifndef TSTKIT_COMMON_HPP
#define TSTKIT_COMMON_HPP

#include <cstdint>
#include <iostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tstkit {

inline constexpr const char* kVersion = "0.1.0";

using Vector = std::vector<double>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (CoNLL-U, JSONL, word vectors, ...).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : Error(what), line_(0) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Caller passed arguments outside an operation's domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Internal or provider contract broken (dimension mismatch, NaN logits, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// A remote call failed; the caller may retry.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Pattern analysis produced no usable text.
class AnalysisError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void log_warning(std::string_view msg) {
  std::cerr << "[tstkit] warning: " << msg << '\n';
}

// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(std::string_view bytes,
                           std::uint64_t h = 14695981039346656037ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
    v >>= 4;
  }
  return out;
}

}  // namespace detail
}  // namespace tstkit

#endif  // TSTKIT_COMMON_HPP
