#include "doctest.h"
#include "fixtures.hpp"

#include "rbac/admin.hpp"
#include "rbac/audit.hpp"
#include "rbac/sod.hpp"

using namespace rbac;

namespace {

const AdminCapability kCap = AdminCapability::issue(UserId("secadmin"));

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kInvalidArgument;
}

AuditEvent exec_event(std::uint64_t ord, const char* user, const char* tran, const char* operand) {
  return {ord, UserId(user), 0, ExecutionRecord{"s", TransactionId(tran), std::string(operand), {}}};
}

}  // namespace

TEST_CASE("static constraint scan") {
  Policy p = testing::load("bank-static.rbac");
  CHECK(check_static(p).empty());
  p.roles[RoleId("PaymentAuthorizer")].members.insert(UserId("carol"));
  const auto v = check_static(p);
  REQUIRE(v.size() == 1);
  CHECK(v[0].user == UserId("carol"));
  CHECK(v[0].constraint_id == "payment-roles");
  CHECK(v[0].roles == std::set<RoleId>{RoleId("PaymentInitiator"), RoleId("PaymentAuthorizer")});

  Policy q = testing::load("bank-static.rbac");
  const StaticSodConstraint three{"three", {RoleId("PaymentInitiator"), RoleId("Teller"), RoleId("AccountingSupervisor")}, 2};
  CHECK(check_static(q, three).empty());  // carol holds exactly two
  q.static_sod.clear();
  CHECK(check_static(q).empty());
}

TEST_CASE("dynamic constraint against history") {
  const DynamicSodConstraint c{"pay", {TransactionId("initiate-payment"), TransactionId("authorize-payment")}, 0};
  const AuditView h({exec_event(1, "alice", "initiate-payment", "payment#42")});

  auto d = check_dynamic(c, h, UserId("alice"), TransactionId("authorize-payment"), "payment#42");
  CHECK_FALSE(d.passed);
  CHECK(d.witness == 1u);
  CHECK(check_dynamic(c, h, UserId("alice"), TransactionId("authorize-payment"), "payment#43").passed);
  CHECK(check_dynamic(c, h, UserId("bob"), TransactionId("authorize-payment"), "payment#42").passed);
  CHECK(check_dynamic(c, h, UserId("alice"), TransactionId("initiate-payment"), "payment#42").passed);

  DynamicSodConstraint late = c;
  late.since = 1;
  CHECK(check_dynamic(late, h, UserId("alice"), TransactionId("authorize-payment"), "payment#42").passed);
}

TEST_CASE("adding constraints") {
  const Policy p = testing::load("bank-static.rbac");
  Policy base = p;
  base.static_sod.clear();
  const StaticSodConstraint c{"pr", {RoleId("PaymentInitiator"), RoleId("PaymentAuthorizer")}, 1};
  CHECK(add_static_constraint(kCap, base, c).static_sod.contains("pr"));

  Policy both = base;
  both.roles[RoleId("PaymentAuthorizer")].members.insert(UserId("carol"));
  try {
    add_static_constraint(kCap, both, c);
    FAIL("retroactive violation accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kRetroactiveStaticViolation);
    CHECK(std::string(e.what()).find("carol") != std::string::npos);
  }

  CHECK(code_of([&] { add_static_constraint(kCap, p, {"payment-roles", c.roles, 1}); }) ==
        ErrorCode::kDuplicateConstraint);
  CHECK(code_of([&] { add_static_constraint(kCap, base, {"x", {RoleId("Teller")}, 1}); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { add_static_constraint(kCap, base, {"x", {RoleId("Teller"), RoleId("Nope")}, 1}); }) ==
        ErrorCode::kUnknownRole);

  const DynamicSodConstraint dyn{"pa", {TransactionId("initiate-payment"), TransactionId("authorize-payment")}, 7};
  const Policy withdyn = add_dynamic_constraint(kCap, base, dyn);
  CHECK(withdyn.dynamic_sod.at("pa").since == 7u);
  CHECK(code_of([&] { add_dynamic_constraint(kCap, base, {"pa", {TransactionId("ghost"), TransactionId("correction")}, 0}); }) ==
        ErrorCode::kUnknownTran);
}

TEST_CASE("a new dynamic constraint ignores older history") {
  Policy p = testing::load("bank.rbac");
  p.dynamic_sod.clear();
  AuditStore store;
  Administrator admin(p, store);
  Session alice = open_session(p, UserId("alice"));
  alice = activate_role(p, alice, RoleId("PaymentInitiator"));
  alice = activate_role(p, alice, RoleId("PaymentAuthorizer"));
  CHECK(record_execution(store, *admin.snapshot(), alice, TransactionId("initiate-payment"), "p1").allowed);

  admin.apply(kCap, {AdminVerb::kAddConstraint, {"dynamic", "pa", "auto", "initiate-payment", "authorize-payment"}});
  CHECK(admin.snapshot()->dynamic_sod.at("pa").since == 2u);
  CHECK(record_execution(store, *admin.snapshot(), alice, TransactionId("authorize-payment"), "p1").allowed);
  CHECK(record_execution(store, *admin.snapshot(), alice, TransactionId("initiate-payment"), "p2").allowed);
  CHECK_FALSE(record_execution(store, *admin.snapshot(), alice, TransactionId("authorize-payment"), "p2").allowed);
}
