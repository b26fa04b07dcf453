#pragma once

#include <doctest.h>

#include <random>
#include <string>

#include "meshforge/linalg.hpp"

namespace testing {

inline std::string fixture(const std::string& name) {
  return std::string(MESHFORGE_FIXTURES) + "/" + name;
}

inline meshforge::ModeVector random_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  meshforge::ModeVector v(n);
  for (int i = 0; i < n; ++i) v[i] = meshforge::Complex(g(rng), g(rng));
  return v;
}

inline double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace testing
