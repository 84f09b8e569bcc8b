#include "doctest.h"
#include "fixtures.hpp"

#include "rbac/policy.hpp"
#include "rbac/types.hpp"

using namespace rbac;

namespace {

bool has_code(const std::vector<Violation>& v, ViolationCode code) {
  for (const auto& x : v) {
    if (x.code == code) return true;
  }
  return false;
}

Policy chain() {
  Policy p = new_policy();
  p.users = {UserId("u")};
  p.objects = {ObjectId("o")};
  for (const char* t : {"t1", "t2", "t3"}) {
    p.transactions[TransactionId(t)] = {TransactionId(t), "proc", {{ObjectId("o"), {AccessMode::kRead}}}};
  }
  p.roles[RoleId("A")] = {RoleId("A"), {}, {TransactionId("t1")}, {RoleId("B")}};
  p.roles[RoleId("B")] = {RoleId("B"), {}, {TransactionId("t2")}, {RoleId("C")}};
  p.roles[RoleId("C")] = {RoleId("C"), {}, {TransactionId("t3")}, {}};
  return p;
}

}  // namespace

TEST_CASE("identifiers") {
  CHECK(is_valid_identifier("Doctor"));
  CHECK(is_valid_identifier("payment-42_x"));
  CHECK_FALSE(is_valid_identifier(""));
  CHECK_FALSE(is_valid_identifier("a b"));
  CHECK_FALSE(is_valid_identifier("caf\xc3\xa9"));
  CHECK_FALSE(is_valid_identifier(std::string(129, 'a')));
  CHECK(is_valid_identifier(std::string(128, 'a')));
  try {
    RoleId bad("no good");
    FAIL("accepted an invalid id");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidIdentifier);
  }
}

TEST_CASE("access modes round-trip through text") {
  for (AccessMode m : kAllAccessModes) CHECK(parse_access_mode(to_string(m)) == m);
  CHECK_FALSE(parse_access_mode("delete"));
}

TEST_CASE("empty policy") {
  Policy p = new_policy();
  CHECK(p.users.empty());
  CHECK(p.roles.empty());
  CHECK(validate_policy(p).empty());
}

TEST_CASE("hospital composition validates") {
  CHECK(validate_policy(testing::load("hospital.rbac")).empty());
  CHECK(validate_policy(chain()).empty());
}

TEST_CASE("validate_policy codes") {
  SUBCASE("two-role cycle") {
    Policy p = chain();
    p.roles[RoleId("B")].contains.insert(RoleId("A"));
    CHECK(has_code(validate_policy(p), ViolationCode::kCycle));
  }
  SUBCASE("self containment") {
    Policy p = chain();
    p.roles[RoleId("C")].contains.insert(RoleId("C"));
    CHECK(has_code(validate_policy(p), ViolationCode::kCycle));
  }
  SUBCASE("restriction outside the grant") {
    Policy p = chain();
    p.restrictions[UserId("u")] = {TransactionId("t1")};
    CHECK(has_code(validate_policy(p), ViolationCode::kRestrictionWidens));
    p.roles[RoleId("C")].members.insert(UserId("u"));
    CHECK(has_code(validate_policy(p), ViolationCode::kRestrictionWidens));
    p.roles[RoleId("A")].members.insert(UserId("u"));
    CHECK(validate_policy(p).empty());
  }
  SUBCASE("dangling references") {
    Policy p = chain();
    p.roles[RoleId("A")].members.insert(UserId("ghost"));
    p.roles[RoleId("A")].transactions.insert(TransactionId("nope"));
    p.roles[RoleId("A")].contains.insert(RoleId("Z"));
    p.transactions[TransactionId("t1")].bindings.push_back({ObjectId("lost"), {AccessMode::kRead}});
    auto v = validate_policy(p);
    CHECK(has_code(v, ViolationCode::kDanglingUser));
    CHECK(has_code(v, ViolationCode::kDanglingTran));
    CHECK(has_code(v, ViolationCode::kDanglingRole));
    CHECK(has_code(v, ViolationCode::kDanglingObject));
  }
  SUBCASE("static constraint breach") {
    Policy p = chain();
    p.roles[RoleId("A")].members.insert(UserId("u"));
    p.roles[RoleId("B")].members.insert(UserId("u"));
    p.static_sod["s"] = {"s", {RoleId("A"), RoleId("B")}, 1};
    CHECK(has_code(validate_policy(p), ViolationCode::kStaticSod));
    p.static_sod["s"].max_memberships = 2;
    CHECK(validate_policy(p).empty());
  }
  SUBCASE("bindings") {
    Policy p = chain();
    p.transactions[TransactionId("t1")].bindings.push_back({ObjectId("o"), {AccessMode::kWrite}});
    CHECK(has_code(validate_policy(p), ViolationCode::kDupBinding));
    p.transactions[TransactionId("t1")].bindings = {{ObjectId("o"), {}}};
    CHECK(has_code(validate_policy(p), ViolationCode::kEmptyBinding));
    p.transactions[TransactionId("t1")].bindings.clear();
    CHECK(has_code(validate_policy(p), ViolationCode::kEmptyBinding));
    p.mode = PolicyMode::kRule4;
    CHECK(validate_policy(p).empty());
  }
  SUBCASE("access rows need rule4") {
    Policy p = chain();
    p.access_table.insert({RoleId("A"), TransactionId("t1"), ObjectId("o"), AccessMode::kRead});
    CHECK(has_code(validate_policy(p), ViolationCode::kModeConflict));
    p.mode = PolicyMode::kRule4;
    CHECK(validate_policy(p).empty());
  }
}

TEST_CASE("reachability and paths") {
  Policy p = chain();
  CHECK(reachable_roles(p, RoleId("A")) == std::set<RoleId>{RoleId("A"), RoleId("B"), RoleId("C")});
  CHECK(reachable_roles(p, RoleId("C")) == std::set<RoleId>{RoleId("C")});
  CHECK(containment_path(p, RoleId("A"), RoleId("C")) ==
        std::vector<RoleId>{RoleId("A"), RoleId("B"), RoleId("C")});
  CHECK(containment_path(p, RoleId("C"), RoleId("A")).empty());
}

TEST_CASE("relation_equal ignores binding order and revision") {
  Policy a = chain();
  a.objects.insert(ObjectId("o2"));
  a.transactions[TransactionId("t1")].bindings.push_back({ObjectId("o2"), {AccessMode::kWrite}});
  Policy b = a;
  std::reverse(b.transactions[TransactionId("t1")].bindings.begin(),
               b.transactions[TransactionId("t1")].bindings.end());
  b.revision = 9;
  CHECK(relation_equal(a, b));
  b.roles[RoleId("C")].transactions.clear();
  CHECK_FALSE(relation_equal(a, b));
}
