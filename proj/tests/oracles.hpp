// Test-only oracles, kept independent of the library's computation
// paths they are checked against.
#pragma once

#include "extkm/phi.hpp"
#include "extkm/rng.hpp"
#include "extkm/sample.hpp"

#include <cmath>
#include <vector>

namespace oracles {

// Direct product-formula weight W_ik = (delta_i / i) prod_{j>i} ((j-1)/j)^{delta_j},
// one-based i, evaluated term by term.
inline double brute_weight(const std::vector<int>& delta, std::size_t i1) {
  const std::size_t k = delta.size();
  if (!delta[i1 - 1]) return 0.0;
  double w = 1.0 / static_cast<double>(i1);
  for (std::size_t j = i1 + 1; j <= k; ++j)
    if (delta[j - 1]) w *= static_cast<double>(j - 1) / static_cast<double>(j);
  return w;
}

// The exponential representation of the product-limit integral:
// S = (1/k) sum_i phi_i delta_i exp{ k int_0^{V_i-} log(1 + 1/(k(1-H_k))) dH^0_k },
// evaluated value-wise with the right-continuous 1-H_k at each censored jump.
inline double s_exp_log(const extkm::TailSubsample& tail, const extkm::PhiFunction& phi) {
  const std::size_t k = tail.k;
  const double dk = static_cast<double>(k);
  std::vector<std::size_t> above(k, 0); // #{l : V_l > V_j}
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t l = 0; l < k; ++l)
      if (tail.v[l] > tail.v[j]) ++above[j];
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (!tail.delta_star[i]) continue;
    double expo = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (tail.delta_star[j] || !(tail.v[j] < tail.v[i])) continue;
      expo += std::log(1.0 + 1.0 / (dk * (static_cast<double>(above[j]) / dk)));
    }
    total += phi(tail.covariates(i), tail.v[i]) * std::exp(expo);
  }
  return total / dk;
}

// Random censored tail subsample with continuous (tie-free) values.
inline extkm::TailSubsample random_tail(std::size_t k, double censor_prob, std::uint64_t seed) {
  extkm::RngStream rng(seed);
  std::vector<std::pair<double, int>> draws(k);
  for (auto& d : draws) {
    const double v = std::pow(rng.next_u01(), -0.7);
    d = {v, rng.next_u01() >= censor_prob ? 1 : 0};
  }
  std::sort(draws.begin(), draws.end(), [](auto& a, auto& b) { return a.first > b.first; });
  extkm::TailSubsample tail;
  tail.k = k;
  tail.threshold = 1.0;
  tail.m = 1;
  tail.v.resize(k);
  tail.delta_star.resize(k);
  tail.x_star.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    tail.v[i] = draws[i].first;
    tail.delta_star[i] = static_cast<std::uint8_t>(draws[i].second);
    tail.x_star[i] = 0.5 + 0.1 * static_cast<double>(i % 7);
  }
  return tail;
}

} // namespace oracles
