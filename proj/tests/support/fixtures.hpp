#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "locelim/frontend.hpp"

#ifndef LOCELIM_FIXTURES
#error "LOCELIM_FIXTURES must point at tests/fixtures"
#endif

namespace testsupport {

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(LOCELIM_FIXTURES) + "/" + name, std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline locelim::Pcfp coin(std::optional<locelim::Int> n = 6) {
  locelim::Pcfp p = locelim::parse_model(read_fixture("coin.pm"));
  if (n) p = locelim::instantiate(p, {{"N", *n}});
  return p;
}

inline locelim::GoalSpec coin_goal(const locelim::Pcfp& p) {
  return locelim::parse_property("P=? [ F x>=N & !f ]", p);
}

}  // namespace testsupport
