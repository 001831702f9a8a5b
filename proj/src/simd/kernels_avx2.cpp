// Built with -mavx2 (no -mfma); only called after a runtime CPU check.
#include <immintrin.h>

#include "lectern/simd/term_kernels.hpp"

namespace lectern::simd {
namespace {

void paper_norms(std::span<const double> dl, double k, double b, double avgdl, std::span<double> out) {
  const double keep = 1.0 - b;
  const double scale = b * avgdl;
  const __m256d vk = _mm256_set1_pd(k);
  const __m256d vkeep = _mm256_set1_pd(keep);
  const __m256d vscale = _mm256_set1_pd(scale);
  std::size_t i = 0;
  for (; i + 4 <= dl.size(); i += 4) {
    __m256d d = _mm256_loadu_pd(dl.data() + i);
    __m256d r = _mm256_mul_pd(vk, _mm256_add_pd(vkeep, _mm256_div_pd(d, vscale)));
    _mm256_storeu_pd(out.data() + i, r);
  }
  for (; i < dl.size(); ++i) out[i] = k * (keep + dl[i] / scale);
}

void standard_norms(std::span<const double> dl, double k, double b, double avgdl, std::span<double> out) {
  const double keep = 1.0 - b;
  const __m256d vk = _mm256_set1_pd(k);
  const __m256d vkeep = _mm256_set1_pd(keep);
  const __m256d vb = _mm256_set1_pd(b);
  const __m256d vavg = _mm256_set1_pd(avgdl);
  std::size_t i = 0;
  for (; i + 4 <= dl.size(); i += 4) {
    __m256d d = _mm256_loadu_pd(dl.data() + i);
    __m256d r = _mm256_mul_pd(vk, _mm256_add_pd(vkeep, _mm256_div_pd(_mm256_mul_pd(vb, d), vavg)));
    _mm256_storeu_pd(out.data() + i, r);
  }
  for (; i < dl.size(); ++i) out[i] = k * (keep + (b * dl[i]) / avgdl);
}

void term_contributions(std::span<const double> tf, std::span<const double> norm, double k, double qtf,
                        double idf, std::span<double> out) {
  const double k1 = k + 1.0;
  const __m256d vk1 = _mm256_set1_pd(k1);
  const __m256d vq = _mm256_set1_pd(qtf);
  const __m256d vidf = _mm256_set1_pd(idf);
  std::size_t i = 0;
  for (; i + 4 <= tf.size(); i += 4) {
    __m256d f = _mm256_loadu_pd(tf.data() + i);
    __m256d n = _mm256_loadu_pd(norm.data() + i);
    __m256d part = _mm256_div_pd(_mm256_mul_pd(vk1, f), _mm256_add_pd(n, f));
    _mm256_storeu_pd(out.data() + i, _mm256_mul_pd(_mm256_mul_pd(vq, part), vidf));
  }
  for (; i < tf.size(); ++i) out[i] = (qtf * ((k1 * tf[i]) / (norm[i] + tf[i]))) * idf;
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{Isa::kAvx2, paper_norms, standard_norms, term_contributions};
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &table : nullptr;
}

}  // namespace lectern::simd
