#include "rbac/admin.hpp"

#include <algorithm>
#include <charconv>

#include "rbac/decision.hpp"
#include "rbac/sod.hpp"

namespace rbac {

std::string_view to_string(AdminVerb verb) {
  switch (verb) {
    case AdminVerb::kGrant: return "grant";
    case AdminVerb::kRevoke: return "revoke";
    case AdminVerb::kAllocate: return "allocate";
    case AdminVerb::kDeallocate: return "deallocate";
    case AdminVerb::kContain: return "contain";
    case AdminVerb::kUncontain: return "uncontain";
    case AdminVerb::kOnboard: return "onboard";
    case AdminVerb::kOffboard: return "offboard";
    case AdminVerb::kAddConstraint: return "add_constraint";
    case AdminVerb::kRestrict: return "restrict";
    case AdminVerb::kUnrestrict: return "unrestrict";
    case AdminVerb::kChangeFunction: return "change_function";
  }
  return "grant";
}

std::optional<AdminVerb> parse_admin_verb(std::string_view text) {
  for (int i = 0; i <= static_cast<int>(AdminVerb::kChangeFunction); ++i) {
    const auto v = static_cast<AdminVerb>(i);
    if (to_string(v) == text) return v;
  }
  return std::nullopt;
}

namespace {

void require_user(const Policy& p, const UserId& u) {
  if (!p.has_user(u)) throw Error(ErrorCode::kUnknownUser, "unknown user '" + u.str() + "'");
}

// Restores the restriction-subset invariant after grants shrank.
void narrow_restrictions(Policy& p) {
  for (auto& [u, allowed] : p.restrictions) {
    const auto granted = granted_transactions(p, u);
    std::erase_if(allowed, [&](const TransactionId& t) { return !granted.contains(t); });
  }
}

std::string join_roles(const std::set<RoleId>& roles) {
  std::string out;
  for (const auto& r : roles) out += (out.empty() ? "" : ",") + r.str();
  return out;
}

void reject_static_conflicts(const Policy& next, const UserId& u, const std::string& what) {
  for (const auto& v : check_static(next)) {
    if (v.user != u) continue;
    throw Error(ErrorCode::kStaticSodViolation,
                what + " violates static-sod " + v.constraint_id + ": " + u.str() +
                    " would hold " + join_roles(v.roles));
  }
}

}  // namespace

Policy grant_membership(const AdminCapability&, const Policy& p, const UserId& u,
                        const RoleId& r) {
  require_user(p, u);
  if (p.role(r).members.contains(u)) return p;
  Policy next = p;
  next.roles.at(r).members.insert(u);
  reject_static_conflicts(next, u, "granting " + r.str() + " to " + u.str());
  return next;
}

Policy revoke_membership(const AdminCapability&, const Policy& p, const UserId& u,
                         const RoleId& r) {
  require_user(p, u);
  if (!p.role(r).members.contains(u)) return p;
  Policy next = p;
  next.roles.at(r).members.erase(u);
  narrow_restrictions(next);
  return next;
}

Policy allocate_transaction(const AdminCapability&, const Policy& p, const RoleId& r,
                            const TransactionId& t) {
  p.role(r);
  p.transaction(t);
  Policy next = p;
  next.roles.at(r).transactions.insert(t);
  return next;
}

Policy deallocate_transaction(const AdminCapability&, const Policy& p, const RoleId& r,
                              const TransactionId& t) {
  p.role(r);
  p.transaction(t);
  if (!p.roles.at(r).transactions.contains(t)) return p;
  Policy next = p;
  next.roles.at(r).transactions.erase(t);
  narrow_restrictions(next);
  return next;
}

Policy add_containment(const AdminCapability&, const Policy& p, const RoleId& parent,
                       const RoleId& child) {
  p.role(parent);
  p.role(child);
  if (parent == child) {
    throw Error(ErrorCode::kCycle, "containment cycle " + parent.str() + " -> " + child.str());
  }
  auto back = containment_path(p, child, parent);
  if (!back.empty()) {
    std::string path = parent.str();
    for (const auto& r : back) path += " -> " + r.str();
    throw Error(ErrorCode::kCycle, "containment cycle " + path);
  }
  Policy next = p;
  next.roles.at(parent).contains.insert(child);
  return next;
}

Policy remove_containment(const AdminCapability&, const Policy& p, const RoleId& parent,
                          const RoleId& child) {
  p.role(parent);
  p.role(child);
  if (!p.roles.at(parent).contains.contains(child)) return p;
  Policy next = p;
  next.roles.at(parent).contains.erase(child);
  narrow_restrictions(next);
  return next;
}

Policy onboard_user(const AdminCapability&, const Policy& p, const UserId& u,
                    const AuditView& history) {
  if (p.has_user(u)) throw Error(ErrorCode::kDuplicateUser, "user '" + u.str() + "' exists");
  for (const AuditEvent& e : history.events()) {
    bool seen = e.actor == u;
    if (const auto* a = e.admin()) {
      switch (a->action.verb) {
        case AdminVerb::kGrant:
        case AdminVerb::kRevoke:
        case AdminVerb::kOnboard:
        case AdminVerb::kOffboard:
        case AdminVerb::kRestrict:
        case AdminVerb::kUnrestrict:
        case AdminVerb::kChangeFunction:
          seen = seen || (!a->action.args.empty() && a->action.args[0] == u.str());
          break;
        default:
          break;
      }
    }
    if (seen) {
      throw Error(ErrorCode::kDuplicateUser, "user id '" + u.str() + "' appears in audit event " +
                                                 std::to_string(e.ordinal) + " and cannot be reused");
    }
  }
  Policy next = p;
  next.users.insert(u);
  return next;
}

Policy offboard_user(const AdminCapability&, const Policy& p, const UserId& u) {
  require_user(p, u);
  Policy next = p;
  for (auto& [_, role] : next.roles) role.members.erase(u);
  next.restrictions.erase(u);
  next.users.erase(u);
  return next;
}

Policy set_restriction(const AdminCapability&, const Policy& p, const UserId& u,
                       std::set<TransactionId> allowed) {
  require_user(p, u);
  const auto granted = granted_transactions(p, u);
  for (const auto& t : allowed) {
    p.transaction(t);
    if (!granted.contains(t)) {
      throw Error(ErrorCode::kRestrictionWidens,
                  "restriction of " + u.str() + " would allow " + t.str() +
                      " which none of the user's roles grants");
    }
  }
  Policy next = p;
  next.restrictions[u] = std::move(allowed);
  return next;
}

Policy clear_restriction(const AdminCapability&, const Policy& p, const UserId& u) {
  require_user(p, u);
  Policy next = p;
  next.restrictions.erase(u);
  return next;
}

Policy change_function(const AdminCapability&, const Policy& p, const UserId& u,
                       const std::set<RoleId>& roles) {
  require_user(p, u);
  for (const auto& r : roles) p.role(r);
  Policy next = p;
  for (auto& [id, role] : next.roles) {
    if (roles.contains(id)) {
      role.members.insert(u);
    } else {
      role.members.erase(u);
    }
  }
  reject_static_conflicts(next, u, "changing the function of " + u.str());
  narrow_restrictions(next);
  return next;
}

// --- recorded actions ------------------------------------------------------------

namespace {

void require_arity(const AdminAction& a, std::size_t min, std::size_t max) {
  if (a.args.size() < min || a.args.size() > max) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(to_string(a.verb)) + " takes " + std::to_string(min) +
                    (max == min ? "" : (max == SIZE_MAX ? "+" : "-" + std::to_string(max))) +
                    " arguments, got " + std::to_string(a.args.size()));
  }
}

std::uint64_t parse_count(const std::string& text, const char* what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + " must be a number: '" + text + "'");
  }
  return v;
}

}  // namespace

AdminAction normalize_action(const AdminAction& action, const AuditView& history) {
  AdminAction out = action;
  if (out.verb == AdminVerb::kAddConstraint && out.args.size() >= 3 && out.args[0] == "dynamic" &&
      out.args[2] == "auto") {
    out.args[2] = std::to_string(history.high_water());
  }
  return out;
}

Policy apply_action(const AdminCapability& cap, const Policy& p, const AdminAction& a,
                    const AuditView& history) {
  const auto& args = a.args;
  switch (a.verb) {
    case AdminVerb::kGrant:
      require_arity(a, 2, 2);
      return grant_membership(cap, p, UserId(args[0]), RoleId(args[1]));
    case AdminVerb::kRevoke:
      require_arity(a, 2, 2);
      return revoke_membership(cap, p, UserId(args[0]), RoleId(args[1]));
    case AdminVerb::kAllocate:
      require_arity(a, 2, 2);
      return allocate_transaction(cap, p, RoleId(args[0]), TransactionId(args[1]));
    case AdminVerb::kDeallocate:
      require_arity(a, 2, 2);
      return deallocate_transaction(cap, p, RoleId(args[0]), TransactionId(args[1]));
    case AdminVerb::kContain:
      require_arity(a, 2, 2);
      return add_containment(cap, p, RoleId(args[0]), RoleId(args[1]));
    case AdminVerb::kUncontain:
      require_arity(a, 2, 2);
      return remove_containment(cap, p, RoleId(args[0]), RoleId(args[1]));
    case AdminVerb::kOnboard:
      require_arity(a, 1, 1);
      return onboard_user(cap, p, UserId(args[0]), history);
    case AdminVerb::kOffboard:
      require_arity(a, 1, 1);
      return offboard_user(cap, p, UserId(args[0]));
    case AdminVerb::kRestrict: {
      require_arity(a, 1, SIZE_MAX);
      std::set<TransactionId> allowed;
      for (std::size_t i = 1; i < args.size(); ++i) allowed.insert(TransactionId(args[i]));
      return set_restriction(cap, p, UserId(args[0]), std::move(allowed));
    }
    case AdminVerb::kUnrestrict:
      require_arity(a, 1, 1);
      return clear_restriction(cap, p, UserId(args[0]));
    case AdminVerb::kChangeFunction: {
      require_arity(a, 1, SIZE_MAX);
      std::set<RoleId> roles;
      for (std::size_t i = 1; i < args.size(); ++i) roles.insert(RoleId(args[i]));
      return change_function(cap, p, UserId(args[0]), roles);
    }
    case AdminVerb::kAddConstraint: {
      require_arity(a, 5, SIZE_MAX);
      if (args[0] == "static") {
        StaticSodConstraint c{args[1], {}, static_cast<int>(parse_count(args[2], "max"))};
        for (std::size_t i = 3; i < args.size(); ++i) c.roles.insert(RoleId(args[i]));
        if (c.roles.size() != args.size() - 3) {
          throw Error(ErrorCode::kInvalidArgument, "static-sod " + c.id + " repeats a role");
        }
        return add_static_constraint(cap, p, std::move(c));
      }
      if (args[0] == "dynamic") {
        const AdminAction resolved = normalize_action(a, history);
        DynamicSodConstraint c{args[1], {}, parse_count(resolved.args[2], "since")};
        for (std::size_t i = 3; i < args.size(); ++i) c.transactions.insert(TransactionId(args[i]));
        if (c.transactions.size() != args.size() - 3) {
          throw Error(ErrorCode::kInvalidArgument, "dynamic-sod " + c.id + " repeats a transaction");
        }
        return add_dynamic_constraint(cap, p, std::move(c));
      }
      throw Error(ErrorCode::kInvalidArgument,
                  "constraint kind must be static or dynamic, got '" + args[0] + "'");
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown admin verb");
}

// --- least privilege ------------------------------------------------------------

std::vector<LeastPrivilegeEntry> least_privilege_report(const Policy& p, const AuditView& history,
                                                        OrdinalRange window) {
  std::vector<LeastPrivilegeEntry> out;
  for (const UserId& u : p.users) {
    LeastPrivilegeEntry entry{u, granted_transactions(p, u), {}, {}};
    if (auto it = p.restrictions.find(u); it != p.restrictions.end()) {
      std::erase_if(entry.granted, [&](const TransactionId& t) { return !it->second.contains(t); });
    }
    for (const AuditEvent& e : history.events()) {
      if (e.ordinal < window.first || e.ordinal > window.last || e.actor != u) continue;
      if (const auto* x = e.execution()) entry.exercised.insert(x->transaction);
    }
    std::set_difference(entry.granted.begin(), entry.granted.end(), entry.exercised.begin(),
                        entry.exercised.end(), std::inserter(entry.surplus, entry.surplus.end()));
    out.push_back(std::move(entry));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.surplus.size() > b.surplus.size();
  });
  return out;
}

// --- Administrator --------------------------------------------------------------

Administrator::Administrator(Policy initial, AuditStore& store)
    : store_(store), current_(std::make_shared<const Policy>(std::move(initial))) {}

std::shared_ptr<const Policy> Administrator::snapshot() const {
  std::lock_guard lock(publish_);
  return current_;
}

std::shared_ptr<const Policy> Administrator::apply(const AdminCapability& cap,
                                                   const AdminAction& action) {
  std::lock_guard writer(writer_);
  const auto base = snapshot();
  const AuditView view = store_.view();
  const AdminAction recorded = normalize_action(action, view);
  Policy next = apply_action(cap, *base, recorded, view);
  next.revision = store_.append(cap.actor(), AdminRecord{recorded});
  auto published = std::make_shared<const Policy>(std::move(next));
  std::lock_guard lock(publish_);
  current_ = published;
  return published;
}

// --- replay ---------------------------------------------------------------------

ReplayReport replay_log(const Policy& initial, const AuditView& log) {
  ReplayReport report;
  std::map<std::uint64_t, Policy> by_revision{{initial.revision, initial}};
  Policy current = initial;
  for (const AuditEvent& e : log.events()) {
    const std::string at = "event " + std::to_string(e.ordinal) + ": ";
    try {
      if (const auto* a = e.admin()) {
        current = apply_action(AdminCapability::issue(e.actor), current, a->action,
                               log.prefix(e.ordinal - 1));
        current.revision = e.ordinal;
        by_revision[e.ordinal] = current;
        ++report.admin_applied;
      } else if (const auto* d = e.decision()) {
        auto it = by_revision.find(d->policy_revision);
        if (it == by_revision.end()) {
          report.mismatches.push_back(at + "unknown policy revision " +
                                      std::to_string(d->policy_revision));
          continue;
        }
        const Session s{d->session, e.actor, d->active_roles};
        const AuditView history = log.prefix(d->history_mark);
        const Decision again =
            d->object ? check_access(it->second, s, d->transaction, *d->object, *d->mode,
                                     d->operand, history)
                      : can_execute(it->second, s, d->transaction, d->operand, history);
        ++report.decisions_checked;
        if (again != d->decision) {
          report.mismatches.push_back(at + "logged " + (d->decision.allowed ? "allow" : "deny") +
                                      ", replay " + (again.allowed ? "allow" : "deny"));
        }
      }
    } catch (const Error& err) {
      report.mismatches.push_back(at + std::string(to_string(err.code())) + " " + err.what());
    }
  }
  return report;
}

}  // namespace rbac
