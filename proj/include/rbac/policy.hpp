#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "rbac/types.hpp"

namespace rbac {

/// Object plus the modes a transaction's procedure uses on it.
struct Binding {
  ObjectId object;
  std::set<AccessMode> modes;

  friend bool operator==(const Binding&, const Binding&) = default;
};

/// A transformation procedure bound to the data items it touches. In bound
/// mode the bindings are the whole data authorization; in rule-4 mode they
/// may be empty and the access table governs object access instead.
struct Transaction {
  TransactionId id;
  std::string procedure;
  std::vector<Binding> bindings;
};

struct Role {
  RoleId id;
  std::set<UserId> members;
  std::set<TransactionId> transactions;
  std::set<RoleId> contains;  // direct edges only
};

/// No user may be a direct member of more than max_memberships roles in the set.
struct StaticSodConstraint {
  std::string id;
  std::set<RoleId> roles;
  int max_memberships = 1;

  friend bool operator==(const StaticSodConstraint&, const StaticSodConstraint&) = default;
};

/// No user may execute two distinct transactions of the set on the same
/// operand key. History at or below `since` predates the constraint and is
/// ignored.
struct DynamicSodConstraint {
  std::string id;
  std::set<TransactionId> transactions;
  std::uint64_t since = 0;

  friend bool operator==(const DynamicSodConstraint&, const DynamicSodConstraint&) = default;
};

/// Row of the rule-4 access function: role may use transaction to access
/// object in mode.
struct AccessEntry {
  RoleId role;
  TransactionId transaction;
  ObjectId object;
  AccessMode mode;

  friend auto operator<=>(const AccessEntry&, const AccessEntry&) = default;
  friend bool operator==(const AccessEntry&, const AccessEntry&) = default;
};

enum class PolicyMode { kBoundTransaction, kRule4 };

std::string_view to_string(PolicyMode mode);

struct Policy {
  std::string name = "policy";
  PolicyMode mode = PolicyMode::kBoundTransaction;
  bool single_active_role = false;
  // Ordinal of the last admin event applied; not part of the relations.
  std::uint64_t revision = 0;

  std::set<UserId> users;
  std::set<ObjectId> objects;
  std::map<RoleId, Role> roles;
  std::map<TransactionId, Transaction> transactions;
  std::set<AccessEntry> access_table;
  // Absent entry means unrestricted; an empty set denies every transaction.
  std::map<UserId, std::set<TransactionId>> restrictions;
  std::map<std::string, StaticSodConstraint> static_sod;
  std::map<std::string, DynamicSodConstraint> dynamic_sod;

  bool has_user(const UserId& u) const { return users.contains(u); }
  bool has_role(const RoleId& r) const { return roles.contains(r); }
  bool has_transaction(const TransactionId& t) const { return transactions.contains(t); }
  bool has_object(const ObjectId& o) const { return objects.contains(o); }

  /// Throwing lookups (UNKNOWN_ROLE / UNKNOWN_TRAN).
  const Role& role(const RoleId& r) const;
  const Transaction& transaction(const TransactionId& t) const;
};

Policy new_policy();

enum class ViolationCode {
  kDanglingUser,
  kDanglingTran,
  kDanglingRole,
  kDanglingObject,
  kCycle,
  kRestrictionWidens,
  kStaticSod,
  kDupBinding,
  kEmptyBinding,
  kModeConflict,
};

std::string_view to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  std::string message;
};

/// Every structural invariant breach in `p`; empty iff well-formed.
std::vector<Violation> validate_policy(const Policy& p);

/// Equality of the relation sets, ignoring binding order.
bool relation_equal(const Policy& a, const Policy& b);

/// Reflexive-transitive containment closure of `r` (includes r).
std::set<RoleId> reachable_roles(const Policy& p, const RoleId& r);

/// A containment path from -> ... -> to, or empty when none exists.
std::vector<RoleId> containment_path(const Policy& p, const RoleId& from, const RoleId& to);

}  // namespace rbac
