#include <gtest/gtest.h>

#include <cstring>
#include <random>
#include <vector>

#include "lectern/simd/term_kernels.hpp"

using namespace lectern::simd;

namespace {

std::vector<const KernelTable*> vector_tables() {
  std::vector<const KernelTable*> out;
  if (auto* t = avx2_kernels()) out.push_back(t);
  if (auto* t = neon_kernels()) out.push_back(t);
  return out;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST(Kernels, ScalarIsAlwaysAvailable) {
  EXPECT_EQ(scalar_kernels().isa, Isa::kScalar);
  const auto& active = active_kernels();
  EXPECT_NE(active.term_contributions, nullptr);
}

TEST(Kernels, ScalarMatchesFormula) {
  std::vector<double> dl{1, 4, 10}, out(3);
  scalar_kernels().paper_norms(dl, 2.0, 0.8, 5.0, out);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(out[i], 2.0 * ((1.0 - 0.8) + dl[i] / (0.8 * 5.0)));
  scalar_kernels().standard_norms(dl, 2.0, 0.8, 5.0, out);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(out[i], 2.0 * ((1.0 - 0.8) + (0.8 * dl[i]) / 5.0));
}

TEST(Kernels, VectorVariantsBitIdentical) {
  const auto tables = vector_tables();
  if (tables.empty()) GTEST_SKIP() << "no vector variant on this CPU";
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> real(0.0, 50.0);
  std::uniform_int_distribution<std::size_t> len(0, 67);
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = len(rng);
    std::vector<double> dl(n), tf(n), norm(n);
    for (std::size_t i = 0; i < n; ++i) {
      dl[i] = std::floor(real(rng)) + 1;
      tf[i] = std::floor(real(rng) / 5) + 1;
      norm[i] = real(rng) + 0.01;
    }
    const double k = 0.5 + real(rng) / 10, b = 0.05 + real(rng) / 55, avgdl = 1 + real(rng);
    const double qtf = std::floor(real(rng) / 10) + 1, idf = real(rng) / 10 - 2.5;

    std::vector<double> ref(n), got(n);
    for (const auto* t : tables) {
      scalar_kernels().paper_norms(dl, k, b, avgdl, ref);
      t->paper_norms(dl, k, b, avgdl, got);
      EXPECT_TRUE(bit_equal(ref, got)) << to_string(t->isa) << " paper_norms n=" << n;
      scalar_kernels().standard_norms(dl, k, b, avgdl, ref);
      t->standard_norms(dl, k, b, avgdl, got);
      EXPECT_TRUE(bit_equal(ref, got)) << to_string(t->isa) << " standard_norms n=" << n;
      scalar_kernels().term_contributions(tf, norm, k, qtf, idf, ref);
      t->term_contributions(tf, norm, k, qtf, idf, got);
      EXPECT_TRUE(bit_equal(ref, got)) << to_string(t->isa) << " term_contributions n=" << n;
    }
  }
}
