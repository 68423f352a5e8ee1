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

#include "repjudge/error.hpp"

#include <utility>

namespace repjudge {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kSchema: return "schema error";
    case ErrorKind::kGrammar: return "grammar error";
    case ErrorKind::kEvaluation: return "evaluation error";
    case ErrorKind::kMissingKeypoint: return "missing keypoint";
    case ErrorKind::kDegenerateGeometry: return "degenerate geometry";
    case ErrorKind::kLowConfidence: return "low confidence";
    case ErrorKind::kUndefinedSimilarity: return "undefined similarity";
    case ErrorKind::kMode: return "mode error";
    case ErrorKind::kNoTarget: return "no target";
    case ErrorKind::kRoi: return "roi error";
    case ErrorKind::kShape: return "shape error";
    case ErrorKind::kConfiguration: return "configuration error";
    case ErrorKind::kAnnotation: return "annotation error";
    case ErrorKind::kDomain: return "domain error";
    case ErrorKind::kProvider: return "provider error";
    case ErrorKind::kPairing: return "pairing error";
    case ErrorKind::kIo: return "io error";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind) {}

ParseError::ParseError(const std::string& message, std::size_t offset)
    : Error(ErrorKind::kParse,
            message + " (at byte " + std::to_string(offset) + ")"),
      offset_(offset) {}

GrammarError::GrammarError(const std::string& message, std::size_t position,
                           std::string semantic_key)
    : Error(ErrorKind::kGrammar,
            (semantic_key.empty() ? std::string() : "'" + semantic_key + "': ") +
                message + " (at position " + std::to_string(position) + ")"),
      position_(position),
      semantic_key_(std::move(semantic_key)) {}

MissingKeypointError::MissingKeypointError(std::string joint)
    : Error(ErrorKind::kMissingKeypoint, "joint '" + joint + "' is not available"),
      joint_(std::move(joint)) {}

}  // namespace repjudge
