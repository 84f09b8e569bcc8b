#include "doctest.h"
#include "fixtures.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "json.hpp"
#include "rbac/cli.hpp"

using namespace rbac;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("rbac-cli-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string copy(const std::string& fixture) {
    const fs::path to = dir / fixture;
    fs::copy_file(testing::fixture_path(fixture), to);
    return to.string();
  }
  std::string file(const std::string& name) const { return (dir / name).string(); }
  static inline int n = 0;
};

const std::string kHospital = testing::fixture_path("hospital.rbac");

}  // namespace

TEST_CASE("validate") {
  CHECK(run({"validate", "--policy", kHospital}).code == cli::kOk);
  const Run broken = run({"validate", "--policy", testing::fixture_path("broken.rbac")});
  CHECK(broken.code == cli::kPolicy);
  CHECK(broken.err.find("6:17: CYCLE") != std::string::npos);
  const Run j = run({"validate", "--policy", testing::fixture_path("broken.rbac"), "--format", "json"});
  const auto doc = nlohmann::json::parse(j.out);
  CHECK(doc["ok"] == false);
  CHECK(doc["errors"][0]["code"] == "CYCLE");
  CHECK(run({"validate", "--policy", "/nonexistent/x.rbac"}).code == cli::kIo);
}

TEST_CASE("check") {
  const Run allow = run({"check", "--policy", kHospital, "--user", "alice", "--activate", "Doctor", "--tran",
                         "prescribe-medication"});
  CHECK(allow.code == cli::kOk);
  CHECK(allow.out.find("allow") != std::string::npos);
  CHECK(allow.out.find("R3 pass") != std::string::npos);

  const Run deny = run({"check", "--policy", kHospital, "--user", "bob", "--activate", "Pharmacist", "--tran",
                        "prescribe-medication"});
  CHECK(deny.code == cli::kDenied);
  CHECK(deny.out.find("deny R3") != std::string::npos);

  const Run js = run({"check", "--policy", kHospital, "--user", "bob", "--activate", "Pharmacist", "--tran",
                      "prescribe-medication", "--format", "json"});
  const auto doc = nlohmann::json::parse(js.out);
  CHECK(doc["allowed"] == false);
  CHECK(doc["first_failure"] == "R3");

  CHECK(run({"check", "--policy", kHospital, "--user", "bob", "--activate", "Doctor", "--tran",
             "prescribe-medication"})
            .code == cli::kDenied);
  CHECK(run({"check", "--policy", kHospital, "--user", "alice"}).code == cli::kUsage);
  CHECK(run({"frobnicate"}).code == cli::kUsage);
  CHECK(run({}).code == cli::kUsage);
}

TEST_CASE("simulate the payment trace") {
  Scratch s;
  const std::string audit = s.file("audit.log");
  const Run r = run({"simulate", "--policy", testing::fixture_path("bank.rbac"), "--trace",
                     testing::fixture_path("payments.trace"), "--audit", audit});
  CHECK(r.code == cli::kDenied);
  CHECK(r.out.find("6: exec alice authorize-payment operand payment#42 -> deny DSOD") != std::string::npos);
  CHECK(r.out.find("(witness event 2)") != std::string::npos);
  CHECK(r.out.find("7: exec alice authorize-payment operand payment#43 -> allow") != std::string::npos);
  CHECK(r.out.find("8: exec bob authorize-payment operand payment#42 -> allow") != std::string::npos);

  const Run q = run({"audit", "query", "--policy", testing::fixture_path("bank.rbac"), "--audit", audit,
                     "--operand", "payment#42", "--kind", "execution", "--format", "json"});
  CHECK(q.code == cli::kOk);
  const auto events = nlohmann::json::parse(q.out);
  REQUIRE(events.size() == 2);
  CHECK(events[0]["actor"] == "alice");
  CHECK(events[1]["actor"] == "bob");
  CHECK_FALSE(events[0].contains("crc32"));

  const Run lp = run({"report", "least-privilege", "--policy", testing::fixture_path("bank.rbac"), "--audit",
                      audit, "--format", "json"});
  CHECK(lp.code == cli::kOk);
  const auto report = nlohmann::json::parse(lp.out);
  REQUIRE(report.size() == 3);
  CHECK(report[0]["user"] == "erin");
}

TEST_CASE("malformed trace") {
  Scratch s;
  const std::string trace = s.file("bad.trace");
  std::ofstream(trace) << "session alice\n";
  CHECK(run({"simulate", "--policy", testing::fixture_path("bank.rbac"), "--trace", trace}).code == cli::kPolicy);
}

TEST_CASE("admin rewrites the policy canonically") {
  Scratch s;
  const std::string policy = s.copy("bank-static.rbac");
  const std::string audit = s.file("audit.log");
  const std::string before = testing::read_fixture("bank-static.rbac");

  const Run rejected = run({"admin", "grant", "carol", "PaymentAuthorizer", "--policy", policy, "--audit", audit});
  CHECK(rejected.code == cli::kDenied);
  CHECK(rejected.err.find("STATIC_SOD_VIOLATION") != std::string::npos);
  std::ifstream in(policy);
  CHECK(std::string(std::istreambuf_iterator<char>(in), {}) == before);

  CHECK(run({"admin", "grant", "carol", "AccountingSupervisor", "--policy", policy, "--audit", audit}).code ==
        cli::kOk);
  const auto after = rbac::parse_policy([&] {
    std::ifstream again(policy);
    return std::string(std::istreambuf_iterator<char>(again), {});
  }());
  REQUIRE(after.ok());
  CHECK(after.policy->roles.at(RoleId("AccountingSupervisor")).members.contains(UserId("carol")));

  CHECK(run({"admin", "add-sod", "dynamic", "dd", "correction", "savings-deposit", "--policy", policy, "--audit",
             audit, "--dry-run"})
            .code == cli::kOk);
  CHECK(run({"admin", "grant", "carol", "--policy", policy}).code == cli::kUsage);
}

TEST_CASE("fmt") {
  Scratch s;
  const std::string policy = s.copy("hospital.rbac");
  const Run r = run({"fmt", "--policy", policy});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.rfind("policy hospital mode bound\n", 0) == 0);
  CHECK(run({"fmt", "--policy", policy, "--write"}).code == cli::kOk);
  CHECK(run({"fmt", "--policy", policy}).out == r.out);
}

TEST_CASE("admin words") {
  CHECK(cli::parse_admin_words({"grant", "u", "r"}).verb == AdminVerb::kGrant);
  const AdminAction d = cli::parse_admin_words({"add-sod", "dynamic", "x", "t1", "t2"});
  CHECK(d.verb == AdminVerb::kAddConstraint);
  CHECK(d.args == std::vector<std::string>{"dynamic", "x", "auto", "t1", "t2"});
  CHECK(cli::parse_admin_words({"restrict", "u"}).args == std::vector<std::string>{"u"});
  CHECK_THROWS_AS(cli::parse_admin_words({"delegate", "u", "r"}), Error);
}
