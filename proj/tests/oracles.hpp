// Test-only oracles, kept independent of the library implementation paths
// they verify.
#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace oracles {

/// Minimize c.x subject to A x = b, x >= 0 (b >= 0), via two-phase dense
/// simplex with Bland's rule. Sizes here are tiny (transport polytopes).
double solve_lp_equality(std::vector<std::vector<double>> A, std::vector<double> b,
                         std::vector<double> c);

/// Exact W1 between weighted 1-D supports via the transport linear program.
double transport_lp_w1(const std::vector<std::pair<double, double>>& a,
                       const std::vector<std::pair<double, double>>& b);

/// Central finite differences.
std::vector<double> finite_diff_grad(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double h = 1e-5);

}  // namespace oracles
