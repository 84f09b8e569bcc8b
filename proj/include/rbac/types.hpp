#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace rbac {

enum class ErrorCode {
  kUnknownUser,
  kUnknownRole,
  kUnknownTran,
  kUnknownObject,
  kUnknownSessionSubject,
  kRoleNotAuthorized,
  kCapExceeded,
  kModeMismatch,
  kNotOneToOne,
  kStaticSodViolation,
  kRetroactiveStaticViolation,
  kCycle,
  kDuplicateUser,
  kDuplicateConstraint,
  kRestrictionWidens,
  kIllformedPolicy,
  kInvalidIdentifier,
  kInvalidArgument,
  kStoreIo,
};

/// Machine-readable name, e.g. "STATIC_SOD_VIOLATION".
std::string_view to_string(ErrorCode code);

/// The single exception type thrown by the library. Callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline constexpr std::size_t kMaxIdentifierLength = 128;

/// Letters, digits, '-' and '_'; 1..128 bytes.
bool is_valid_identifier(std::string_view text) noexcept;

/// Case-sensitive identifier tagged by kind so a RoleId cannot be passed where
/// a UserId is expected.
template <class Tag>
class Identifier {
 public:
  Identifier() = default;
  explicit Identifier(std::string value) : value_(std::move(value)) {
    if (!is_valid_identifier(value_)) {
      throw Error(ErrorCode::kInvalidIdentifier,
                  std::string(Tag::kKind) + " identifier '" + value_ + "' is invalid");
    }
  }

  const std::string& str() const noexcept { return value_; }

  friend auto operator<=>(const Identifier&, const Identifier&) = default;
  friend bool operator==(const Identifier&, const Identifier&) = default;

  friend std::ostream& operator<<(std::ostream& os, const Identifier& id) {
    return os << id.value_;
  }

 private:
  std::string value_;
};

struct UserTag { static constexpr const char* kKind = "user"; };
struct RoleTag { static constexpr const char* kKind = "role"; };
struct TransactionTag { static constexpr const char* kKind = "transaction"; };
struct ObjectTag { static constexpr const char* kKind = "object"; };

using UserId = Identifier<UserTag>;
using RoleId = Identifier<RoleTag>;
using TransactionId = Identifier<TransactionTag>;
using ObjectId = Identifier<ObjectTag>;

enum class AccessMode { kRead, kWrite, kAppend, kExecute };

inline constexpr AccessMode kAllAccessModes[] = {AccessMode::kRead, AccessMode::kWrite,
                                                 AccessMode::kAppend, AccessMode::kExecute};

std::string_view to_string(AccessMode mode);
std::optional<AccessMode> parse_access_mode(std::string_view text);

}  // namespace rbac

template <class Tag>
struct std::hash<rbac::Identifier<Tag>> {
  std::size_t operator()(const rbac::Identifier<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
