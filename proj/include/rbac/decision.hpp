#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rbac/policy.hpp"

namespace rbac {

class AuditView;

enum class RuleId { kR1, kR2, kR3, kR4, kRestriction, kDsod };

std::string_view to_string(RuleId rule);
std::optional<RuleId> parse_rule_id(std::string_view text);

struct RuleOutcome {
  RuleId rule;
  bool passed;
  std::string detail;
  // Ordinal of the prior execution that caused a DSOD failure.
  std::optional<std::uint64_t> witness;

  friend bool operator==(const RuleOutcome&, const RuleOutcome&) = default;
};

/// Result of evaluating an execution request. Evaluation stops at the first
/// failing rule, so a deny's last trace entry is the reason.
struct Decision {
  bool allowed = false;
  std::vector<RuleOutcome> trace;

  const RuleOutcome* first_failure() const;

  friend bool operator==(const Decision&, const Decision&) = default;
};

/// A subject's live context: AR(s) is `active_roles`.
struct Session {
  std::string id;
  UserId subject;
  std::set<RoleId> active_roles;

  friend bool operator==(const Session&, const Session&) = default;
};

/// RA(u): roles listing u as a direct member. Containment does not widen it.
std::set<RoleId> authorized_roles(const Policy& p, const UserId& u);

/// TA(r) closed under containment.
std::set<TransactionId> effective_transactions(const Policy& p, const RoleId& r);

/// Union of effective transactions over all of u's memberships, before any
/// restriction is applied.
std::set<TransactionId> granted_transactions(const Policy& p, const UserId& u);

/// Throws UNKNOWN_SESSION_SUBJECT when the user is not in the policy.
Session open_session(const Policy& p, const UserId& u, std::string session_id = {});

Session activate_role(const Policy& p, const Session& s, const RoleId& r);
Session deactivate_role(const Session& s, const RoleId& r);

/// exec(s, t): rules R1, R2, R3, then the subject's restriction, then dynamic
/// separation of duty against `history`. Pure.
Decision can_execute(const Policy& p, const Session& s, const TransactionId& t,
                     const std::optional<std::string>& operand, const AuditView& history);

/// Rule-4 check: can_execute plus an (active role, t, o, x) access-table row.
Decision check_access(const Policy& p, const Session& s, const TransactionId& t,
                      const ObjectId& o, AccessMode x,
                      const std::optional<std::string>& operand, const AuditView& history);
Decision check_access(const Policy& p, const Session& s, const TransactionId& t,
                      const ObjectId& o, AccessMode x);

/// Clark-Wilson triple evaluation for policies where every user holds exactly
/// one role; throws NOT_ONE_TO_ONE otherwise.
Decision clark_wilson_check(const Policy& p, const UserId& u, const TransactionId& t,
                            const ObjectId& o, AccessMode x);

}  // namespace rbac
