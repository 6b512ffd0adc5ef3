#include "cltlab/numeric.hpp"

namespace cltlab {

double pairwise_sum(std::span<const double> values) {
  return pairwise_sum(values, [](double v) { return v; });
}

}  // namespace cltlab
