#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "rbac/dsl.hpp"

namespace testing {

inline std::string fixture_path(const std::string& name) { return std::string(RBAC_FIXTURE_DIR) + "/" + name; }

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name), std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline rbac::Policy load(const std::string& name) {
  auto result = rbac::parse_policy(read_fixture(name));
  if (!result.ok()) throw std::runtime_error(name + ": " + rbac::format_error(result.errors.front()));
  return *result.policy;
}

}  // namespace testing
