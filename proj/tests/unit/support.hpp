#pragma once

#include <initializer_list>
#include <string>

#include "mdual/fixtures.hpp"
#include "mdual/io.hpp"
#include "mdual/problem.hpp"

namespace mdual::test {

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline ProblemFile fixture_file(const std::string& id) {
  return problem_file_from_json(make_fixture(id), id);
}

inline Problem fixture_problem(const std::string& id) { return fixture_file(id).problem; }

}  // namespace mdual::test
