#include "lectern/simd/term_kernels.hpp"

namespace lectern::simd {
namespace {

void paper_norms(std::span<const double> dl, double k, double b, double avgdl, std::span<double> out) {
  const double keep = 1.0 - b;
  const double scale = b * avgdl;
  for (std::size_t i = 0; i < dl.size(); ++i) out[i] = k * (keep + dl[i] / scale);
}

void standard_norms(std::span<const double> dl, double k, double b, double avgdl, std::span<double> out) {
  const double keep = 1.0 - b;
  for (std::size_t i = 0; i < dl.size(); ++i) out[i] = k * (keep + (b * dl[i]) / avgdl);
}

void term_contributions(std::span<const double> tf, std::span<const double> norm, double k, double qtf,
                        double idf, std::span<double> out) {
  const double k1 = k + 1.0;
  for (std::size_t i = 0; i < tf.size(); ++i) out[i] = (qtf * ((k1 * tf[i]) / (norm[i] + tf[i]))) * idf;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Isa::kScalar, paper_norms, standard_norms, term_contributions};
  return table;
}

}  // namespace lectern::simd
