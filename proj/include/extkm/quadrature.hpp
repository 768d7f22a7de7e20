#pragma once

#include <functional>
#include <vector>

namespace extkm::quad {

using Fn1 = std::function<double(double)>;

struct Options {
  double abs_tol = 1e-10;
  int max_depth = 48;
};

/// Adaptive Simpson integral of f over [a,b]. Known kinks or peaks can
/// be passed as breakpoints; the interval is split there before the
/// adaptive stage.
double integrate(const Fn1& f, double a, double b, Options opt = {},
                 const std::vector<double>& breakpoints = {});

/// Integral of f over [a, inf). Integrates [a, a+block], doubling the
/// block until an added block contributes less than abs_tol. Intended
/// for integrands with at-least-polynomial decay.
double integrate_to_inf(const Fn1& f, double a, Options opt = {}, double first_block = 1.0);

/// E[g(W)] for W Pareto on [1,inf) with survival w^{-tail_exponent},
/// computed on the log scale: int_0^inf g(e^u) a e^{-a u} du. Truncation
/// continues past the 1e-12 survival point until blocks stop mattering.
double pareto_expectation(const Fn1& g, double tail_exponent, Options opt = {});

} // namespace extkm::quad
