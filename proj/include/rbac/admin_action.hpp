#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rbac {

enum class AdminVerb {
  kGrant,
  kRevoke,
  kAllocate,
  kDeallocate,
  kContain,
  kUncontain,
  kOnboard,
  kOffboard,
  kAddConstraint,
  kRestrict,
  kUnrestrict,
  kChangeFunction,
};

std::string_view to_string(AdminVerb verb);
std::optional<AdminVerb> parse_admin_verb(std::string_view text);

/// A policy mutation as recorded in the audit log. Argument layout per verb:
///   grant/revoke          user role
///   allocate/deallocate   role transaction
///   contain/uncontain     parent child
///   onboard/offboard      user
///   restrict              user transaction...
///   unrestrict            user
///   change_function       user role...
///   add_constraint        static  id max role role...
///   add_constraint        dynamic id since transaction transaction...
/// For a dynamic constraint `since` may be "auto", which Administrator::apply
/// replaces with the audit high-water mark before recording.
struct AdminAction {
  AdminVerb verb;
  std::vector<std::string> args;

  friend bool operator==(const AdminAction&, const AdminAction&) = default;
};

}  // namespace rbac
