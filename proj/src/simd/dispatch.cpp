#include <cstdlib>
#include <string>

#include "lectern/simd/term_kernels.hpp"

namespace lectern::simd {

#if !LECTERN_HAVE_AVX2
const KernelTable* avx2_kernels() { return nullptr; }
#endif
#if !LECTERN_HAVE_NEON
const KernelTable* neon_kernels() { return nullptr; }
#endif

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

namespace {

const KernelTable& select() {
  if (const char* forced = std::getenv("LECTERN_SIMD")) {
    std::string name(forced);
    if (name == "scalar") return scalar_kernels();
    if (name == "avx2" && avx2_kernels()) return *avx2_kernels();
    if (name == "neon" && neon_kernels()) return *neon_kernels();
  }
  if (const auto* t = avx2_kernels()) return *t;
  if (const auto* t = neon_kernels()) return *t;
  return scalar_kernels();
}

}  // namespace

const KernelTable& active_kernels() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace lectern::simd
