#pragma once

#include <vector>

namespace fasdoa {

struct Atom {
  double position = 0.0;
  double weight = 0.0;
};

// Probability measure on [0, D] built by the Frank-Wolfe design loop.
struct DesignMeasure {
  std::vector<Atom> atoms;
  double kw_gap = 0.0;  // last certified sup phi(p) - L
  int iterations_used = 0;

  double total_weight() const;
  double mean() const;
  void normalize();
};

}  // namespace fasdoa
