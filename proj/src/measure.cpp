#include "fasdoa/measure.hpp"

#include "fasdoa/error.hpp"

namespace fasdoa {

double DesignMeasure::total_weight() const {
  double s = 0.0;
  for (const auto& a : atoms) s += a.weight;
  return s;
}

double DesignMeasure::mean() const {
  double s = 0.0;
  for (const auto& a : atoms) s += a.weight * a.position;
  return s / total_weight();
}

void DesignMeasure::normalize() {
  const double total = total_weight();
  if (!(total > 0.0)) throw Error(ErrorKind::InvalidArgument, "measure has no mass");
  for (auto& a : atoms) a.weight /= total;
}

}  // namespace fasdoa
