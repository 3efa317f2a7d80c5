#pragma once

#include <cstdint>

namespace celltrace {

// Exact integer moments of a pair of 16-bit blocks.
struct ProductSums {
    std::uint64_t count = 0;
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    std::uint64_t aa = 0;
    std::uint64_t bb = 0;
    std::uint64_t ab = 0;
};

double normcov_from_sums(const ProductSums& sums);

}  // namespace celltrace
