#include "rbac/types.hpp"

namespace rbac {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownUser: return "UNKNOWN_USER";
    case ErrorCode::kUnknownRole: return "UNKNOWN_ROLE";
    case ErrorCode::kUnknownTran: return "UNKNOWN_TRAN";
    case ErrorCode::kUnknownObject: return "UNKNOWN_OBJECT";
    case ErrorCode::kUnknownSessionSubject: return "UNKNOWN_SESSION_SUBJECT";
    case ErrorCode::kRoleNotAuthorized: return "ROLE_NOT_AUTHORIZED";
    case ErrorCode::kCapExceeded: return "CAP_EXCEEDED";
    case ErrorCode::kModeMismatch: return "MODE_MISMATCH";
    case ErrorCode::kNotOneToOne: return "NOT_ONE_TO_ONE";
    case ErrorCode::kStaticSodViolation: return "STATIC_SOD_VIOLATION";
    case ErrorCode::kRetroactiveStaticViolation: return "RETROACTIVE_STATIC_VIOLATION";
    case ErrorCode::kCycle: return "CYCLE";
    case ErrorCode::kDuplicateUser: return "DUPLICATE_USER";
    case ErrorCode::kDuplicateConstraint: return "DUPLICATE_CONSTRAINT";
    case ErrorCode::kRestrictionWidens: return "RESTRICTION_WIDENS";
    case ErrorCode::kIllformedPolicy: return "ILLFORMED_POLICY";
    case ErrorCode::kInvalidIdentifier: return "INVALID_IDENTIFIER";
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kStoreIo: return "STORE_IO";
  }
  return "UNKNOWN";
}

bool is_valid_identifier(std::string_view text) noexcept {
  if (text.empty() || text.size() > kMaxIdentifierLength) return false;
  for (char c : text) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_';
    if (!ok) return false;
  }
  return true;
}

std::string_view to_string(AccessMode mode) {
  switch (mode) {
    case AccessMode::kRead: return "read";
    case AccessMode::kWrite: return "write";
    case AccessMode::kAppend: return "append";
    case AccessMode::kExecute: return "execute";
  }
  return "read";
}

std::optional<AccessMode> parse_access_mode(std::string_view text) {
  for (AccessMode m : kAllAccessModes) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

}  // namespace rbac
