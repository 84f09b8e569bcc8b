#include "rbac/sod.hpp"

#include "rbac/admin.hpp"
#include "rbac/audit.hpp"

namespace rbac {

std::vector<StaticSodViolation> check_static(const Policy& p, const StaticSodConstraint& c) {
  std::map<UserId, std::set<RoleId>> held;
  for (const RoleId& r : c.roles) {
    auto it = p.roles.find(r);
    if (it == p.roles.end()) continue;
    for (const auto& u : it->second.members) held[u].insert(r);
  }
  std::vector<StaticSodViolation> out;
  for (auto& [u, roles] : held) {
    if (static_cast<int>(roles.size()) > c.max_memberships) {
      out.push_back({c.id, u, std::move(roles)});
    }
  }
  return out;
}

std::vector<StaticSodViolation> check_static(const Policy& p) {
  std::vector<StaticSodViolation> out;
  for (const auto& [id, c] : p.static_sod) {
    auto v = check_static(p, c);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

DynamicCheck check_dynamic(const DynamicSodConstraint& c, const AuditView& history,
                           const UserId& u, const TransactionId& t, const std::string& operand) {
  if (!c.transactions.contains(t)) return {true, std::nullopt, "outside dynamic-sod " + c.id};
  for (const AuditEvent& e : history.events()) {
    if (e.ordinal <= c.since || e.actor != u) continue;
    const ExecutionRecord* x = e.execution();
    if (x == nullptr || x->operand != operand || x->transaction == t ||
        !c.transactions.contains(x->transaction)) {
      continue;
    }
    return {false, e.ordinal,
            "dynamic-sod " + c.id + ": " + u.str() + " executed " + x->transaction.str() + " on " +
                operand + " at event " + std::to_string(e.ordinal)};
  }
  return {true, std::nullopt, "no conflicting execution under " + c.id};
}

namespace {

void check_constraint_id(const Policy& p, const std::string& id) {
  if (!is_valid_identifier(id)) {
    throw Error(ErrorCode::kInvalidIdentifier, "constraint id '" + id + "' is invalid");
  }
  if (p.static_sod.contains(id) || p.dynamic_sod.contains(id)) {
    throw Error(ErrorCode::kDuplicateConstraint, "constraint '" + id + "' already exists");
  }
}

}  // namespace

Policy add_static_constraint(const AdminCapability&, const Policy& p, StaticSodConstraint c) {
  check_constraint_id(p, c.id);
  if (c.roles.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "static-sod " + c.id + " needs at least two roles");
  }
  if (c.max_memberships < 1) {
    throw Error(ErrorCode::kInvalidArgument, "static-sod " + c.id + " needs max >= 1");
  }
  for (const auto& r : c.roles) p.role(r);
  auto violators = check_static(p, c);
  if (!violators.empty()) {
    std::string names;
    for (const auto& v : violators) names += (names.empty() ? "" : ", ") + v.user.str();
    throw Error(ErrorCode::kRetroactiveStaticViolation,
                "static-sod " + c.id + " already violated by " + names);
  }
  Policy next = p;
  next.static_sod.emplace(c.id, std::move(c));
  return next;
}

Policy add_dynamic_constraint(const AdminCapability&, const Policy& p, DynamicSodConstraint c) {
  check_constraint_id(p, c.id);
  if (c.transactions.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "dynamic-sod " + c.id + " needs at least two transactions");
  }
  for (const auto& t : c.transactions) p.transaction(t);
  Policy next = p;
  next.dynamic_sod.emplace(c.id, std::move(c));
  return next;
}

}  // namespace rbac
