#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "klsens/distribution.hpp"
#include "klsens/errors.hpp"

namespace klsens {

/// Hard cap on product-space enumeration (number of states).
inline constexpr std::size_t kEnumBudget = 10'000'000;

/// n^T with a budget check; budget error above `budget` states.
std::size_t path_count_checked(std::size_t n, int depth, std::size_t budget = kEnumBudget,
                               const std::string& what = "product-space enumeration");

/// Visit every length-T index tuple whose first coordinate equals `first`,
/// in lexicographic order.  The visitor receives the index tuple, the atom
/// values and the product probability.
///
/// Enumeration-based operations sweep one such block per first coordinate
/// and combine block results in atom order, which keeps the arithmetic
/// identical whether blocks run serially or on OpenMP threads.
template <class Visitor>
void for_each_path_with_first(const FiniteDistribution& d, int depth, int first,
                              Visitor&& visit) {
  const int n = static_cast<int>(d.size());
  std::vector<int> idx(depth, 0);
  std::vector<double> vals(depth);
  std::vector<double> prefix(depth + 1, 1.0);  // prefix[k] = prob of idx[0..k)
  idx[0] = first;
  for (int t = 0; t < depth; ++t) {
    vals[t] = d.atom(idx[t]);
    prefix[t + 1] = prefix[t] * d.prob(idx[t]);
  }
  while (true) {
    visit(std::span<const int>(idx), std::span<const double>(vals), prefix[depth]);
    int t = depth - 1;
    while (t >= 1 && idx[t] == n - 1) --t;
    if (t < 1) return;
    ++idx[t];
    vals[t] = d.atom(idx[t]);
    prefix[t + 1] = prefix[t] * d.prob(idx[t]);
    for (int r = t + 1; r < depth; ++r) {
      idx[r] = 0;
      vals[r] = d.atom(0);
      prefix[r + 1] = prefix[r] * d.prob(0);
    }
  }
}

/// Serial sweep of the full product space in lexicographic order.
template <class Visitor>
void for_each_path(const FiniteDistribution& d, int depth, Visitor&& visit) {
  for (int first = 0; first < static_cast<int>(d.size()); ++first)
    for_each_path_with_first(d, depth, first, visit);
}

}  // namespace klsens
