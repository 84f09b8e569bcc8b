#include "rbac/decision.hpp"

#include "rbac/audit.hpp"
#include "rbac/sod.hpp"

namespace rbac {

std::string_view to_string(RuleId rule) {
  switch (rule) {
    case RuleId::kR1: return "R1";
    case RuleId::kR2: return "R2";
    case RuleId::kR3: return "R3";
    case RuleId::kR4: return "R4";
    case RuleId::kRestriction: return "RESTRICTION";
    case RuleId::kDsod: return "DSOD";
  }
  return "R1";
}

std::optional<RuleId> parse_rule_id(std::string_view text) {
  for (RuleId r : {RuleId::kR1, RuleId::kR2, RuleId::kR3, RuleId::kR4, RuleId::kRestriction,
                   RuleId::kDsod}) {
    if (to_string(r) == text) return r;
  }
  return std::nullopt;
}

const RuleOutcome* Decision::first_failure() const {
  for (const auto& o : trace) {
    if (!o.passed) return &o;
  }
  return nullptr;
}

std::set<RoleId> authorized_roles(const Policy& p, const UserId& u) {
  if (!p.has_user(u)) throw Error(ErrorCode::kUnknownUser, "unknown user '" + u.str() + "'");
  std::set<RoleId> out;
  for (const auto& [id, role] : p.roles) {
    if (role.members.contains(u)) out.insert(id);
  }
  return out;
}

std::set<TransactionId> effective_transactions(const Policy& p, const RoleId& r) {
  p.role(r);
  std::set<TransactionId> out;
  for (const RoleId& reached : reachable_roles(p, r)) {
    const auto& ts = p.roles.at(reached).transactions;
    out.insert(ts.begin(), ts.end());
  }
  return out;
}

std::set<TransactionId> granted_transactions(const Policy& p, const UserId& u) {
  std::set<TransactionId> out;
  for (const auto& [id, role] : p.roles) {
    if (!role.members.contains(u)) continue;
    auto ts = effective_transactions(p, id);
    out.insert(ts.begin(), ts.end());
  }
  return out;
}

Session open_session(const Policy& p, const UserId& u, std::string session_id) {
  if (!p.has_user(u)) {
    throw Error(ErrorCode::kUnknownSessionSubject, "no user '" + u.str() + "' in policy");
  }
  if (session_id.empty()) session_id = u.str();
  return Session{std::move(session_id), u, {}};
}

Session activate_role(const Policy& p, const Session& s, const RoleId& r) {
  if (!p.has_user(s.subject)) {
    throw Error(ErrorCode::kUnknownSessionSubject, "no user '" + s.subject.str() + "' in policy");
  }
  p.role(r);
  if (!p.roles.at(r).members.contains(s.subject)) {
    throw Error(ErrorCode::kRoleNotAuthorized,
                "role " + r.str() + " is not authorized for " + s.subject.str());
  }
  if (p.single_active_role && !s.active_roles.empty() && !s.active_roles.contains(r)) {
    throw Error(ErrorCode::kCapExceeded,
                "policy allows one active role; " + s.subject.str() + " already has one");
  }
  Session next = s;
  next.active_roles.insert(r);
  return next;
}

Session deactivate_role(const Session& s, const RoleId& r) {
  Session next = s;
  next.active_roles.erase(r);
  return next;
}

namespace {

std::string join(const std::set<RoleId>& roles) {
  std::string out;
  for (const auto& r : roles) out += (out.empty() ? "" : ",") + r.str();
  return out;
}

// Appends an outcome and reports whether evaluation may continue.
bool push(Decision& d, RuleId rule, bool passed, std::string detail,
          std::optional<std::uint64_t> witness = std::nullopt) {
  d.trace.push_back({rule, passed, std::move(detail), witness});
  return passed;
}

bool check_restriction(Decision& d, const Policy& p, const UserId& u, const TransactionId& t) {
  auto it = p.restrictions.find(u);
  if (it == p.restrictions.end()) return push(d, RuleId::kRestriction, true, "unrestricted");
  if (it->second.contains(t)) {
    return push(d, RuleId::kRestriction, true, t.str() + " within restriction of " + u.str());
  }
  return push(d, RuleId::kRestriction, false, "restriction of " + u.str() + " excludes " + t.str());
}

bool check_dsod(Decision& d, const Policy& p, const UserId& u, const TransactionId& t,
                const std::optional<std::string>& operand, const AuditView& history) {
  bool constrained = false;
  for (const auto& [id, c] : p.dynamic_sod) {
    if (!c.transactions.contains(t)) continue;
    constrained = true;
    if (!operand) {
      return push(d, RuleId::kDsod, false,
                  "MISSING_OPERAND: " + t.str() + " is under dynamic-sod " + id);
    }
    DynamicCheck r = check_dynamic(c, history, u, t, *operand);
    if (!r.passed) return push(d, RuleId::kDsod, false, r.detail, r.witness);
  }
  return push(d, RuleId::kDsod, true,
              constrained ? "no conflicting execution" : "no dynamic constraint covers " + t.str());
}

}  // namespace

Decision can_execute(const Policy& p, const Session& s, const TransactionId& t,
                     const std::optional<std::string>& operand, const AuditView& history) {
  Decision d;
  auto finish = [&d](bool ok) {
    d.allowed = ok;
    return d;
  };

  if (!push(d, RuleId::kR1, !s.active_roles.empty(),
            s.active_roles.empty() ? "no active role" : "active roles " + join(s.active_roles))) {
    return finish(false);
  }
  p.transaction(t);

  if (!p.has_user(s.subject)) {
    push(d, RuleId::kR2, false, "subject " + s.subject.str() + " is not a user of the policy");
    return finish(false);
  }
  std::set<RoleId> stale;
  for (const auto& r : s.active_roles) {
    if (!p.has_role(r) || !p.roles.at(r).members.contains(s.subject)) stale.insert(r);
  }
  if (!push(d, RuleId::kR2, stale.empty(),
            stale.empty() ? "active roles authorized"
                          : "active roles not authorized for " + s.subject.str() + ": " + join(stale))) {
    return finish(false);
  }

  RoleId via;
  for (const auto& r : s.active_roles) {
    if (effective_transactions(p, r).contains(t)) {
      via = r;
      break;
    }
  }
  if (!push(d, RuleId::kR3, !via.str().empty(),
            via.str().empty() ? t.str() + " not authorized for active roles " + join(s.active_roles)
                              : t.str() + " authorized via " + via.str())) {
    return finish(false);
  }

  if (!check_restriction(d, p, s.subject, t)) return finish(false);
  if (!check_dsod(d, p, s.subject, t, operand, history)) return finish(false);
  return finish(true);
}

namespace {

void require_rule4(const Policy& p, const ObjectId& o) {
  if (p.mode != PolicyMode::kRule4) {
    throw Error(ErrorCode::kModeMismatch, "object access checks need a rule4 policy");
  }
  if (!p.has_object(o)) throw Error(ErrorCode::kUnknownObject, "unknown object '" + o.str() + "'");
}

std::string access_row(const std::string& role, const TransactionId& t, const ObjectId& o,
                       AccessMode x) {
  return "(" + role + ", " + t.str() + ", " + o.str() + ", " + std::string(to_string(x)) + ")";
}

}  // namespace

Decision check_access(const Policy& p, const Session& s, const TransactionId& t, const ObjectId& o,
                      AccessMode x, const std::optional<std::string>& operand,
                      const AuditView& history) {
  require_rule4(p, o);
  Decision d = can_execute(p, s, t, operand, history);
  if (!d.allowed) return d;
  for (const auto& r : s.active_roles) {
    if (p.access_table.contains(AccessEntry{r, t, o, x})) {
      push(d, RuleId::kR4, true, "access row " + access_row(r.str(), t, o, x));
      return d;
    }
  }
  push(d, RuleId::kR4, false, "no access row " + access_row(join(s.active_roles), t, o, x));
  d.allowed = false;
  return d;
}

Decision check_access(const Policy& p, const Session& s, const TransactionId& t, const ObjectId& o,
                      AccessMode x) {
  return check_access(p, s, t, o, x, std::nullopt, AuditView{});
}

Decision clark_wilson_check(const Policy& p, const UserId& u, const TransactionId& t,
                            const ObjectId& o, AccessMode x) {
  require_rule4(p, o);
  std::map<UserId, std::vector<RoleId>> role_of;
  for (const auto& [id, role] : p.roles) {
    for (const auto& m : role.members) role_of[m].push_back(id);
  }
  for (const auto& user : p.users) {
    if (role_of[user].size() != 1) {
      throw Error(ErrorCode::kNotOneToOne, "user " + user.str() + " holds " +
                                               std::to_string(role_of[user].size()) + " roles");
    }
  }
  if (!p.has_user(u)) throw Error(ErrorCode::kUnknownUser, "unknown user '" + u.str() + "'");
  p.transaction(t);

  // The triple (user, procedure, object) is read through the user's only role.
  const RoleId& role = role_of[u].front();
  Decision d;
  push(d, RuleId::kR1, true, "triple role " + role.str());
  push(d, RuleId::kR2, true, u.str() + " is the sole member binding of " + role.str());
  if (!push(d, RuleId::kR3, effective_transactions(p, role).contains(t),
            t.str() + (effective_transactions(p, role).contains(t) ? " in " : " not in ") +
                "triples of " + role.str())) {
    return d;
  }
  if (!check_restriction(d, p, u, t)) return d;
  if (!check_dsod(d, p, u, t, std::nullopt, AuditView{})) return d;
  const bool ok = p.access_table.contains(AccessEntry{role, t, o, x});
  push(d, RuleId::kR4, ok, (ok ? "access row " : "no access row ") + access_row(role.str(), t, o, x));
  d.allowed = ok;
  return d;
}

}  // namespace rbac
