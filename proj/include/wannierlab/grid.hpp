#pragma once

#include "wannierlab/common.hpp"

namespace wannierlab {

/// Uniform k-grid on [-1/2,1/2]^d with both endpoints stored, so a family on
/// the grid keeps n+1 values per direction: node i sits at -1/2 + i/n.
/// The grid contains 0 and +-1/2 and is symmetric under k -> -k
/// (node i pairs with node n-i).
struct KGrid {
  int dim = 1;
  int n1 = 0;
  int n2 = 0;  // unused when dim == 1

  static KGrid line(int n) { return KGrid{1, check(n), 0}; }
  static KGrid square(int n1, int n2) { return KGrid{2, check(n1), check(n2)}; }

  double node1(int i) const { return -0.5 + double(i) / n1; }
  double node2(int j) const { return -0.5 + double(j) / n2; }
  KVec node(int i, int j = 0) const {
    return dim == 1 ? KVec{node1(i), 0.0} : KVec{node1(i), node2(j)};
  }
  int mirror1(int i) const { return n1 - i; }
  int mirror2(int j) const { return n2 - j; }
  double dk1() const { return 1.0 / n1; }
  double dk2() const { return 1.0 / n2; }

 private:
  static int check(int n) {
    if (n < 4 || n % 2 != 0)
      throw Error("grid", "node count must be even and >= 4, got " + std::to_string(n));
    return n;
  }
};

}  // namespace wannierlab
