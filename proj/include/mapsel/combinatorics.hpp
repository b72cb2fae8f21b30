#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace mapsel {

// ln C(n,k) via lgamma; exact enough for penalties at any size we meet
inline double log_binomial(int n, int k) {
  if (n < 0) throw std::invalid_argument("log_binomial: n < 0");
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// C(n,k), saturating: returns the exact count if <= cap, otherwise cap + 1.
inline std::uint64_t binomial_capped(int n, int k, std::uint64_t cap) {
  if (n < 0) throw std::invalid_argument("binomial_capped: n < 0");
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 acc = 1;
  for (int i = 1; i <= k; ++i) {
    acc = acc * (unsigned __int128)(n - k + i) / (unsigned __int128)i;
    if (acc > cap) return cap + 1;
  }
  return std::uint64_t(acc);
}

// sum_{k=0}^{r} C(p,k), saturating at cap + 1 like binomial_capped
inline std::uint64_t enumeration_cost(int p, int r, std::uint64_t cap) {
  unsigned __int128 total = 0;
  for (int k = 0; k <= r; ++k) {
    const std::uint64_t c = binomial_capped(p, k, cap);
    total += c;
    if (total > cap) return cap + 1;
  }
  return std::uint64_t(total);
}

// visit all k-subsets of {0..p-1} in lexicographic order; fn takes
// const std::vector<int>&
template <class Fn>
void for_each_combination(int p, int k, Fn&& fn) {
  if (k < 0 || k > p) return;
  std::vector<int> comb(k);
  std::iota(comb.begin(), comb.end(), 0);
  while (true) {
    fn(const_cast<const std::vector<int>&>(comb));
    int i = k - 1;
    while (i >= 0 && comb[i] == p - k + i) --i;
    if (i < 0) break;
    ++comb[i];
    for (int j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
  }
}

}  // namespace mapsel
