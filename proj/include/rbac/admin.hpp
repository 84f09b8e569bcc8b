#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "rbac/admin_action.hpp"
#include "rbac/audit.hpp"
#include "rbac/policy.hpp"

namespace rbac {

/// Proof that the caller acts as the security administrator. Every operation
/// that changes memberships, allocations, containment, restrictions or
/// constraints demands one; the decision engine never does. Issuance is the
/// extension point for real administrator authentication.
class AdminCapability {
 public:
  static AdminCapability issue(UserId actor) { return AdminCapability(std::move(actor)); }

  const UserId& actor() const noexcept { return actor_; }

 private:
  explicit AdminCapability(UserId actor) : actor_(std::move(actor)) {}

  UserId actor_;
};

// Pure policy transforms. Each returns the new policy or throws, leaving the
// input untouched. Operations that shrink what a user is granted (revoke,
// deallocate, uncontain, change_function) also intersect that user's
// restriction with the new grant so restrictions never widen.

/// Rejects with STATIC_SOD_VIOLATION when the grant would break a static
/// constraint. Idempotent.
Policy grant_membership(const AdminCapability& cap, const Policy& p, const UserId& u,
                        const RoleId& r);
Policy revoke_membership(const AdminCapability& cap, const Policy& p, const UserId& u,
                         const RoleId& r);
Policy allocate_transaction(const AdminCapability& cap, const Policy& p, const RoleId& r,
                            const TransactionId& t);
Policy deallocate_transaction(const AdminCapability& cap, const Policy& p, const RoleId& r,
                              const TransactionId& t);
/// Rejects with CYCLE (message names the closing path) when child already
/// reaches parent.
Policy add_containment(const AdminCapability& cap, const Policy& p, const RoleId& parent,
                       const RoleId& child);
Policy remove_containment(const AdminCapability& cap, const Policy& p, const RoleId& parent,
                          const RoleId& child);

/// Ids are never reused: DUPLICATE_USER if `u` is current or appears anywhere
/// in `history`.
Policy onboard_user(const AdminCapability& cap, const Policy& p, const UserId& u,
                    const AuditView& history);
/// Drops every membership and restriction of `u`, then `u` itself.
Policy offboard_user(const AdminCapability& cap, const Policy& p, const UserId& u);

/// `allowed` must lie within the user's granted transactions.
Policy set_restriction(const AdminCapability& cap, const Policy& p, const UserId& u,
                       std::set<TransactionId> allowed);
Policy clear_restriction(const AdminCapability& cap, const Policy& p, const UserId& u);

/// Replaces all of u's memberships with `roles` in one step; the static SoD
/// check applies to the final membership set only.
Policy change_function(const AdminCapability& cap, const Policy& p, const UserId& u,
                       const std::set<RoleId>& roles);

/// Replaces an "auto" dynamic-constraint `since` with the history high-water.
AdminAction normalize_action(const AdminAction& action, const AuditView& history);

/// Dispatches a recorded action to the transforms above.
Policy apply_action(const AdminCapability& cap, const Policy& p, const AdminAction& action,
                    const AuditView& history);

struct OrdinalRange {
  std::uint64_t first = 1;
  std::uint64_t last = std::numeric_limits<std::uint64_t>::max();
};

struct LeastPrivilegeEntry {
  UserId user;
  std::set<TransactionId> granted;
  std::set<TransactionId> exercised;
  std::set<TransactionId> surplus;
};

/// Granted-versus-exercised differential per current user, largest surplus
/// first (ties by user id).
std::vector<LeastPrivilegeEntry> least_privilege_report(const Policy& p, const AuditView& history,
                                                        OrdinalRange window = {});

/// Single-writer owner of the live policy. Each mutation is logged before
/// the new snapshot is published; readers take immutable snapshots.
class Administrator {
 public:
  Administrator(Policy initial, AuditStore& store);

  std::shared_ptr<const Policy> snapshot() const;

  /// Applies, records and publishes. Returns the published snapshot.
  std::shared_ptr<const Policy> apply(const AdminCapability& cap, const AdminAction& action);

 private:
  AuditStore& store_;
  std::mutex writer_;
  mutable std::mutex publish_;
  std::shared_ptr<const Policy> current_;
};

struct ReplayReport {
  std::size_t admin_applied = 0;
  std::size_t decisions_checked = 0;
  std::vector<std::string> mismatches;

  bool ok() const { return mismatches.empty(); }
};

/// Re-derives every logged decision from `initial` plus the logged admin
/// actions and compares verdicts and traces.
ReplayReport replay_log(const Policy& initial, const AuditView& log);

}  // namespace rbac
