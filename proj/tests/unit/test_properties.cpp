#include "doctest.h"
#include "fixtures.hpp"
#include "oracle.hpp"

#include "rbac/admin.hpp"
#include "rbac/audit.hpp"
#include "rbac/sod.hpp"

using namespace rbac;

namespace {

const AdminCapability kCap = AdminCapability::issue(UserId("secadmin"));

Policy two_duty_policy(bool with_static) {
  Policy p = new_policy();
  p.objects = {ObjectId("ledger")};
  for (const char* t : {"tA", "tB", "shared"}) {
    p.transactions[TransactionId(t)] = {TransactionId(t), "proc", {{ObjectId("ledger"), {AccessMode::kWrite}}}};
  }
  p.roles[RoleId("A")] = {RoleId("A"), {}, {TransactionId("tA"), TransactionId("shared")}, {}};
  p.roles[RoleId("B")] = {RoleId("B"), {}, {TransactionId("tB"), TransactionId("shared")}, {}};
  for (int i = 0; i < 4; ++i) p.users.insert(UserId("u" + std::to_string(i)));
  p.dynamic_sod["ab"] = {"ab", {TransactionId("tA"), TransactionId("tB")}, 0};
  if (with_static) p.static_sod["ab-static"] = {"ab-static", {RoleId("A"), RoleId("B")}, 1};
  return p;
}

// Random grants, revokes, activations and executions; returns how many
// executions were denied by dynamic SoD.
std::size_t fuzz_two_duty(Policy p, std::uint64_t seed) {
  oracle::Rng rng(seed);
  AuditStore store;
  Administrator admin(std::move(p), store);
  std::map<UserId, Session> sessions;
  std::size_t dsod = 0;
  const std::vector<std::string> roles{"A", "B"};
  const std::vector<std::string> trans{"tA", "tB", "shared"};
  const std::vector<std::string> operands{"k1", "k2"};
  for (int step = 0; step < 200; ++step) {
    const UserId u("u" + std::to_string(rng.below(4)));
    const auto snap = admin.snapshot();
    switch (rng.below(4)) {
      case 0:
        try {
          admin.apply(kCap, {rng.chance(70) ? AdminVerb::kGrant : AdminVerb::kRevoke, {u.str(), rng.pick(roles)}});
        } catch (const Error&) {
        }
        break;
      case 1:
        try {
          Session s = sessions.contains(u) ? sessions[u] : open_session(*snap, u);
          sessions[u] = activate_role(*snap, s, RoleId(rng.pick(roles)));
        } catch (const Error&) {
        }
        break;
      default: {
        const Session s = sessions.contains(u) ? sessions[u] : Session{u.str(), u, {}};
        const Decision d = record_execution(store, *snap, s, TransactionId(rng.pick(trans)), rng.pick(operands));
        if (!d.allowed && d.first_failure()->rule == RuleId::kDsod) ++dsod;
      }
    }
  }
  return dsod;
}

}  // namespace

TEST_CASE("containment is monotone") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const Policy p = oracle::generate(seed).policy;
    for (const auto& [id, role] : p.roles) {
      const auto outer = effective_transactions(p, id);
      for (const auto& c : role.contains) {
        const auto inner = effective_transactions(p, c);
        CHECK(std::includes(outer.begin(), outer.end(), inner.begin(), inner.end()));
      }
    }
  }
}

TEST_CASE("static separation implies dynamic safety over exclusive transactions") {
  std::size_t without = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    CHECK(fuzz_two_duty(two_duty_policy(true), seed) == 0);
    without += fuzz_two_duty(two_duty_policy(false), seed);
  }
  // The same traces without the static constraint do collide.
  CHECK(without > 0);
}

TEST_CASE("administration preserves well-formedness") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto sc = oracle::generate(seed);
    Policy p = sc.policy;
    for (const auto& step : sc.trace) {
      if (step.kind != oracle::Step::kAdmin) continue;
      try {
        p = apply_action(kCap, p, step.action, AuditView());
      } catch (const Error&) {
        continue;
      }
      INFO("seed " << seed << " verb " << to_string(step.action.verb));
      CHECK(validate_policy(p).empty());
    }
  }
}

TEST_CASE("dynamic denials persist as history grows") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto sc = oracle::generate(seed);
    AuditStore store;
    Administrator admin(sc.policy, store);
    std::map<UserId, Session> sessions;
    for (const auto& step : sc.trace) {
      if (step.kind == oracle::Step::kActivate) {
        try {
          const auto snap = admin.snapshot();
          Session s = sessions.contains(step.user) ? sessions[step.user] : open_session(*snap, step.user);
          sessions[step.user] = activate_role(*snap, s, step.role);
        } catch (const Error&) {
        }
      } else if (step.kind == oracle::Step::kExec) {
        const Session s = sessions.contains(step.user) ? sessions[step.user] : Session{step.user.str(), step.user, {}};
        record_execution(store, *admin.snapshot(), s, step.tran, step.operand);
      }
    }
    const AuditView full = store.view();
    for (const auto& e : full.events()) {
      const DecisionRecord* d = e.decision();
      if (d == nullptr || d->decision.allowed || d->decision.first_failure()->rule != RuleId::kDsod || !d->operand) {
        continue;
      }
      bool still = false;
      for (const auto& [id, c] : sc.policy.dynamic_sod) {
        if (!c.transactions.contains(d->transaction)) continue;
        still |= !check_dynamic(c, full, e.actor, d->transaction, *d->operand).passed;
      }
      CHECK(still);
    }
  }
}

TEST_CASE("operand keys are independent") {
  const Policy p = testing::load("bank.rbac");
  Session alice = open_session(p, UserId("alice"));
  alice = activate_role(p, alice, RoleId("PaymentInitiator"));
  alice = activate_role(p, alice, RoleId("PaymentAuthorizer"));
  const std::vector<TransactionId> trans{TransactionId("initiate-payment"), TransactionId("authorize-payment")};

  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    oracle::Rng rng(seed);
    std::vector<TransactionId> focus;
    for (int i = 0; i < 6; ++i) focus.push_back(rng.pick(trans));

    AuditStore alone;
    std::vector<bool> expected;
    for (const auto& t : focus) expected.push_back(record_execution(alone, p, alice, t, "focus").allowed);

    AuditStore mixed;
    std::vector<bool> got;
    for (const auto& t : focus) {
      for (std::size_t k = rng.below(3); k > 0; --k) {
        record_execution(mixed, p, alice, rng.pick(trans), "other-" + std::to_string(rng.below(3)));
      }
      got.push_back(record_execution(mixed, p, alice, t, "focus").allowed);
    }
    CHECK(got == expected);
  }
}
