#include "rbac/policy.hpp"

#include <algorithm>
#include <functional>

#include "rbac/decision.hpp"
#include "rbac/sod.hpp"

namespace rbac {

std::string_view to_string(PolicyMode mode) {
  return mode == PolicyMode::kRule4 ? "rule4" : "bound";
}

std::string_view to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::kDanglingUser: return "DANGLING_USER";
    case ViolationCode::kDanglingTran: return "DANGLING_TRAN";
    case ViolationCode::kDanglingRole: return "DANGLING_ROLE";
    case ViolationCode::kDanglingObject: return "DANGLING_OBJECT";
    case ViolationCode::kCycle: return "CYCLE";
    case ViolationCode::kRestrictionWidens: return "RESTRICTION_WIDENS";
    case ViolationCode::kStaticSod: return "STATIC_SOD";
    case ViolationCode::kDupBinding: return "DUP_BINDING";
    case ViolationCode::kEmptyBinding: return "EMPTY_BINDING";
    case ViolationCode::kModeConflict: return "MODE_CONFLICT";
  }
  return "UNKNOWN";
}

const Role& Policy::role(const RoleId& r) const {
  auto it = roles.find(r);
  if (it == roles.end()) throw Error(ErrorCode::kUnknownRole, "unknown role '" + r.str() + "'");
  return it->second;
}

const Transaction& Policy::transaction(const TransactionId& t) const {
  auto it = transactions.find(t);
  if (it == transactions.end()) {
    throw Error(ErrorCode::kUnknownTran, "unknown transaction '" + t.str() + "'");
  }
  return it->second;
}

Policy new_policy() { return Policy{}; }

std::set<RoleId> reachable_roles(const Policy& p, const RoleId& r) {
  std::set<RoleId> seen;
  if (!p.has_role(r)) return seen;
  std::vector<RoleId> stack{r};
  seen.insert(r);
  while (!stack.empty()) {
    RoleId cur = stack.back();
    stack.pop_back();
    for (const RoleId& child : p.roles.at(cur).contains) {
      if (p.has_role(child) && seen.insert(child).second) stack.push_back(child);
    }
  }
  return seen;
}

std::vector<RoleId> containment_path(const Policy& p, const RoleId& from, const RoleId& to) {
  // BFS with parent links so the reported path is a shortest one.
  if (!p.has_role(from)) return {};
  std::map<RoleId, RoleId> parent;
  std::vector<RoleId> frontier{from};
  std::set<RoleId> seen{from};
  while (!frontier.empty()) {
    std::vector<RoleId> next;
    for (const RoleId& cur : frontier) {
      if (cur == to) {
        std::vector<RoleId> path{cur};
        for (RoleId at = cur; at != from;) {
          at = parent.at(at);
          path.push_back(at);
        }
        std::reverse(path.begin(), path.end());
        return path;
      }
      for (const RoleId& child : p.roles.at(cur).contains) {
        if (p.has_role(child) && seen.insert(child).second) {
          parent[child] = cur;
          next.push_back(child);
        }
      }
    }
    frontier = std::move(next);
  }
  return {};
}

namespace {

std::string join_path(const std::vector<RoleId>& path) {
  std::string out;
  for (const auto& r : path) {
    if (!out.empty()) out += " -> ";
    out += r.str();
  }
  return out;
}

void find_cycles(const Policy& p, std::vector<Violation>& out) {
  enum class Color { kWhite, kGrey, kBlack };
  std::map<RoleId, Color> color;
  for (const auto& [id, _] : p.roles) color[id] = Color::kWhite;
  std::vector<RoleId> stack;

  std::function<void(const RoleId&)> visit = [&](const RoleId& r) {
    color[r] = Color::kGrey;
    stack.push_back(r);
    for (const RoleId& child : p.roles.at(r).contains) {
      if (!p.has_role(child)) continue;
      if (color[child] == Color::kGrey) {
        auto start = std::find(stack.begin(), stack.end(), child);
        std::vector<RoleId> cycle(start, stack.end());
        cycle.push_back(child);
        out.push_back({ViolationCode::kCycle, "containment cycle " + join_path(cycle)});
      } else if (color[child] == Color::kWhite) {
        visit(child);
      }
    }
    stack.pop_back();
    color[r] = Color::kBlack;
  };
  for (const auto& [id, _] : p.roles) {
    if (color[id] == Color::kWhite) visit(id);
  }
}

}  // namespace

std::vector<Violation> validate_policy(const Policy& p) {
  std::vector<Violation> out;
  auto add = [&](ViolationCode c, std::string msg) { out.push_back({c, std::move(msg)}); };

  for (const auto& [rid, role] : p.roles) {
    for (const auto& u : role.members) {
      if (!p.has_user(u)) add(ViolationCode::kDanglingUser, "role " + rid.str() + " lists unknown member " + u.str());
    }
    for (const auto& t : role.transactions) {
      if (!p.has_transaction(t)) add(ViolationCode::kDanglingTran, "role " + rid.str() + " allocates unknown transaction " + t.str());
    }
    for (const auto& c : role.contains) {
      if (!p.has_role(c)) add(ViolationCode::kDanglingRole, "role " + rid.str() + " contains unknown role " + c.str());
    }
  }
  find_cycles(p, out);

  for (const auto& [tid, tran] : p.transactions) {
    std::set<ObjectId> seen;
    if (tran.bindings.empty() && p.mode == PolicyMode::kBoundTransaction) {
      add(ViolationCode::kEmptyBinding, "transaction " + tid.str() + " binds no data in bound mode");
    }
    for (const auto& b : tran.bindings) {
      if (!seen.insert(b.object).second) {
        add(ViolationCode::kDupBinding, "transaction " + tid.str() + " binds " + b.object.str() + " twice");
      }
      if (!p.has_object(b.object)) {
        add(ViolationCode::kDanglingObject, "transaction " + tid.str() + " binds unknown object " + b.object.str());
      }
      if (b.modes.empty()) {
        add(ViolationCode::kEmptyBinding, "transaction " + tid.str() + " binds " + b.object.str() + " with no mode");
      }
    }
  }

  if (p.mode == PolicyMode::kBoundTransaction && !p.access_table.empty()) {
    add(ViolationCode::kModeConflict, "access table entries in a bound-transaction policy");
  }
  for (const auto& e : p.access_table) {
    const std::string row = "access " + e.role.str() + " " + e.transaction.str() + " " + e.object.str();
    if (!p.has_role(e.role)) add(ViolationCode::kDanglingRole, row + ": unknown role");
    if (!p.has_transaction(e.transaction)) add(ViolationCode::kDanglingTran, row + ": unknown transaction");
    if (!p.has_object(e.object)) add(ViolationCode::kDanglingObject, row + ": unknown object");
  }

  for (const auto& [u, allowed] : p.restrictions) {
    if (!p.has_user(u)) {
      add(ViolationCode::kDanglingUser, "restriction for unknown user " + u.str());
      continue;
    }
    const auto granted = granted_transactions(p, u);
    for (const auto& t : allowed) {
      if (!p.has_transaction(t)) {
        add(ViolationCode::kDanglingTran, "restriction of " + u.str() + " names unknown transaction " + t.str());
      } else if (!granted.contains(t)) {
        add(ViolationCode::kRestrictionWidens,
            "restriction of " + u.str() + " allows " + t.str() + " which no role of the user grants");
      }
    }
  }

  for (const auto& [id, c] : p.static_sod) {
    for (const auto& r : c.roles) {
      if (!p.has_role(r)) add(ViolationCode::kDanglingRole, "static-sod " + id + " names unknown role " + r.str());
    }
  }
  for (const auto& [id, c] : p.dynamic_sod) {
    for (const auto& t : c.transactions) {
      if (!p.has_transaction(t)) add(ViolationCode::kDanglingTran, "dynamic-sod " + id + " names unknown transaction " + t.str());
    }
  }
  for (const auto& v : check_static(p)) {
    std::string roles;
    for (const auto& r : v.roles) roles += (roles.empty() ? "" : ",") + r.str();
    add(ViolationCode::kStaticSod, "user " + v.user.str() + " violates static-sod " + v.constraint_id + " via " + roles);
  }
  return out;
}

namespace {

std::vector<Binding> normalized(std::vector<Binding> b) {
  std::sort(b.begin(), b.end(), [](const Binding& x, const Binding& y) {
    return std::tie(x.object, x.modes) < std::tie(y.object, y.modes);
  });
  return b;
}

}  // namespace

bool relation_equal(const Policy& a, const Policy& b) {
  if (a.name != b.name || a.mode != b.mode || a.single_active_role != b.single_active_role ||
      a.users != b.users || a.objects != b.objects || a.access_table != b.access_table ||
      a.restrictions != b.restrictions || a.static_sod != b.static_sod ||
      a.dynamic_sod != b.dynamic_sod || a.roles.size() != b.roles.size() ||
      a.transactions.size() != b.transactions.size()) {
    return false;
  }
  for (const auto& [id, ra] : a.roles) {
    auto it = b.roles.find(id);
    if (it == b.roles.end()) return false;
    const Role& rb = it->second;
    if (ra.members != rb.members || ra.transactions != rb.transactions || ra.contains != rb.contains) {
      return false;
    }
  }
  for (const auto& [id, ta] : a.transactions) {
    auto it = b.transactions.find(id);
    if (it == b.transactions.end()) return false;
    if (ta.procedure != it->second.procedure ||
        normalized(ta.bindings) != normalized(it->second.bindings)) {
      return false;
    }
  }
  return true;
}

}  // namespace rbac
