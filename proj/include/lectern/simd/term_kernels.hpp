#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Inner loops of the passage scoring function. Each kernel has a scalar
// reference and vector variants that must produce bit-identical results:
// every variant evaluates the same IEEE operations in the same order and the
// build disables floating-point contraction.

namespace lectern::simd {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view to_string(Isa isa);

struct KernelTable {
  Isa isa;

  /// out[i] = K * ((1 - b) + dl[i] / (b * avgdl))
  void (*paper_norms)(std::span<const double> dl, double k, double b, double avgdl,
                      std::span<double> out);
  /// out[i] = K * ((1 - b) + (b * dl[i]) / avgdl)
  void (*standard_norms)(std::span<const double> dl, double k, double b, double avgdl,
                         std::span<double> out);
  /// out[i] = (qtf * (((K + 1) * tf[i]) / (norm[i] + tf[i]))) * idf
  void (*term_contributions)(std::span<const double> tf, std::span<const double> norm,
                             double k, double qtf, double idf, std::span<double> out);
};

const KernelTable& scalar_kernels();
/// nullptr when the variant is not compiled in or the CPU lacks it.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

/// Best supported table; LECTERN_SIMD=scalar|avx2|neon overrides when available.
const KernelTable& active_kernels();

}  // namespace lectern::simd
