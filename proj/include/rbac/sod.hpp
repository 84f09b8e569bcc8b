#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rbac/policy.hpp"

namespace rbac {

class AuditView;
class AdminCapability;

struct StaticSodViolation {
  std::string constraint_id;
  UserId user;
  std::set<RoleId> roles;  // the user's memberships inside the constraint set

  friend bool operator==(const StaticSodViolation&, const StaticSodViolation&) = default;
};

/// Exhaustive scan over users x static constraints.
std::vector<StaticSodViolation> check_static(const Policy& p);

/// Violations `c` would have against the current memberships of `p`.
std::vector<StaticSodViolation> check_static(const Policy& p, const StaticSodConstraint& c);

struct DynamicCheck {
  bool passed = true;
  std::optional<std::uint64_t> witness;
  std::string detail;
};

/// Fails iff `history` holds a successful execution by `u` of another
/// transaction of `c` on `operand`, recorded after the constraint's creation.
DynamicCheck check_dynamic(const DynamicSodConstraint& c, const AuditView& history,
                           const UserId& u, const TransactionId& t, const std::string& operand);

Policy add_static_constraint(const AdminCapability& cap, const Policy& p, StaticSodConstraint c);
Policy add_dynamic_constraint(const AdminCapability& cap, const Policy& p, DynamicSodConstraint c);

}  // namespace rbac
