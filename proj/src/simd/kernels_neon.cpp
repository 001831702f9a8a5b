#include <arm_neon.h>

#include "lectern/simd/term_kernels.hpp"

namespace lectern::simd {
namespace {

void paper_norms(std::span<const double> dl, double k, double b, double avgdl, std::span<double> out) {
  const double keep = 1.0 - b;
  const double scale = b * avgdl;
  const float64x2_t vk = vdupq_n_f64(k);
  const float64x2_t vkeep = vdupq_n_f64(keep);
  const float64x2_t vscale = vdupq_n_f64(scale);
  std::size_t i = 0;
  for (; i + 2 <= dl.size(); i += 2) {
    float64x2_t d = vld1q_f64(dl.data() + i);
    vst1q_f64(out.data() + i, vmulq_f64(vk, vaddq_f64(vkeep, vdivq_f64(d, vscale))));
  }
  for (; i < dl.size(); ++i) out[i] = k * (keep + dl[i] / scale);
}

void standard_norms(std::span<const double> dl, double k, double b, double avgdl, std::span<double> out) {
  const double keep = 1.0 - b;
  const float64x2_t vk = vdupq_n_f64(k);
  const float64x2_t vkeep = vdupq_n_f64(keep);
  const float64x2_t vb = vdupq_n_f64(b);
  const float64x2_t vavg = vdupq_n_f64(avgdl);
  std::size_t i = 0;
  for (; i + 2 <= dl.size(); i += 2) {
    float64x2_t d = vld1q_f64(dl.data() + i);
    vst1q_f64(out.data() + i, vmulq_f64(vk, vaddq_f64(vkeep, vdivq_f64(vmulq_f64(vb, d), vavg))));
  }
  for (; i < dl.size(); ++i) out[i] = k * (keep + (b * dl[i]) / avgdl);
}

void term_contributions(std::span<const double> tf, std::span<const double> norm, double k, double qtf,
                        double idf, std::span<double> out) {
  const double k1 = k + 1.0;
  const float64x2_t vk1 = vdupq_n_f64(k1);
  const float64x2_t vq = vdupq_n_f64(qtf);
  const float64x2_t vidf = vdupq_n_f64(idf);
  std::size_t i = 0;
  for (; i + 2 <= tf.size(); i += 2) {
    float64x2_t f = vld1q_f64(tf.data() + i);
    float64x2_t n = vld1q_f64(norm.data() + i);
    float64x2_t part = vdivq_f64(vmulq_f64(vk1, f), vaddq_f64(n, f));
    vst1q_f64(out.data() + i, vmulq_f64(vmulq_f64(vq, part), vidf));
  }
  for (; i < tf.size(); ++i) out[i] = (qtf * ((k1 * tf[i]) / (norm[i] + tf[i]))) * idf;
}

}  // namespace

const KernelTable* neon_kernels() {
  static const KernelTable table{Isa::kNeon, paper_norms, standard_norms, term_contributions};
  return &table;
}

}  // namespace lectern::simd
