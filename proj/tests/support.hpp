#pragma once

#include <cstdint>

#include "bandlab/bandlab.hpp"

namespace support {

/// Complex Gaussian matrix with unit-variance entries.
inline bandlab::CMatrix random_matrix(long rows, long cols, std::uint64_t seed) {
  bandlab::Stream s(seed);
  bandlab::CMatrix m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m(i, j) = bandlab::Complex(s.normal(), s.normal()) * M_SQRT1_2;
  return m;
}

inline bandlab::CMatrix random_isometry(long rows, long cols, std::uint64_t seed) {
  return bandlab::qr_thin(random_matrix(rows, cols, seed)).q;
}

inline double rel(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

}  // namespace support
