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

#ifndef REPJUDGE_ERROR_HPP_
#define REPJUDGE_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace repjudge {

enum class ErrorKind {
  kParse,               // malformed JSON / CSV / file syntax
  kSchema,              // document shape violates a type invariant
  kGrammar,             // condition string outside the expression grammar
  kEvaluation,          // ill-typed condition at evaluation time
  kMissingKeypoint,     // joint not resolvable under a schema / feature set
  kDegenerateGeometry,  // zero-length limb vector
  kLowConfidence,       // required keypoints below the confidence floor
  kUndefinedSimilarity, // zero vector, no visible joints
  kMode,                // tracker mode incompatible with the input
  kNoTarget,            // no athlete could be selected
  kRoi,                 // ROI does not intersect the frame
  kShape,               // dimension / length mismatch
  kConfiguration,       // invalid settings or empty groups
  kAnnotation,          // inconsistent ground truth
  kDomain,              // argument outside the function's domain
  kProvider,            // embedding provider failure
  kPairing,             // prediction / ground-truth id mismatch
  kIo,                  // filesystem errors
};

std::string_view to_string(ErrorKind kind);

// Base of every error the library throws. `kind()` lets callers (the CLI in
// particular) map failures onto exit codes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// JSON syntax error; `offset` is the byte offset reported by the parser.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Condition-grammar error. `position` is a 0-based character index into the
// condition string; `semantic_key` is set when the condition came from a
// named constraint inside a rule document.
class GrammarError : public Error {
 public:
  GrammarError(const std::string& message, std::size_t position,
               std::string semantic_key = {});
  std::size_t position() const noexcept { return position_; }
  const std::string& semantic_key() const noexcept { return semantic_key_; }

 private:
  std::size_t position_;
  std::string semantic_key_;
};

class MissingKeypointError : public Error {
 public:
  explicit MissingKeypointError(std::string joint);
  const std::string& joint() const noexcept { return joint_; }

 private:
  std::string joint_;
};

}  // namespace repjudge

#endif  // REPJUDGE_ERROR_HPP_
