#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rbac/policy.hpp"

namespace rbac {

struct SourceSpan {
  std::size_t line = 1;    // 1-based
  std::size_t column = 1;  // 1-based, in bytes
  std::size_t length = 0;  // bytes

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

enum class ParseErrorCode {
  kLex,
  kSyntax,
  kDuplicateDecl,
  kUnknownRef,
  kCycle,
  kModeConflict,
  kRestrictionWidens,
  kStaticSod,
};

std::string_view to_string(ParseErrorCode code);

struct ParseError {
  SourceSpan span;
  ParseErrorCode code;
  std::string message;
};

struct ParseResult {
  std::optional<Policy> policy;  // set iff errors is empty
  std::vector<ParseError> errors;

  bool ok() const { return policy.has_value(); }
};

/// Parses `.rbac` source. Never throws on malformed input; every detectable
/// error is reported, recovering at the next line.
ParseResult parse_policy(std::string_view source);

/// Canonical text. Throws ILLFORMED_POLICY when validate_policy(p) is not empty.
std::string serialize_policy(const Policy& p);

/// The bytes of `source` covered by `span` (empty when out of range).
std::string_view span_text(std::string_view source, const SourceSpan& span);

/// "line:col: CODE: message"
std::string format_error(const ParseError& e);

}  // namespace rbac
