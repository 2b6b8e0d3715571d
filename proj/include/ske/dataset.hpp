#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ske/errors.hpp"

namespace ske::dataset {

using Vector = std::vector<double>;

// Synthetic stand-in for a multi-impression biometric corpus: S subjects,
// I impressions each, with a controlled within-subject cosine-similarity
// distribution. Impressions are unit-norm perturbations of one latent
// direction per subject.
struct Population {
  std::uint32_t subjects = 0;
  std::uint32_t impressions = 0;
  std::uint32_t dim = 0;
  std::uint64_t seed = 0;
  double cos_mean = 0.0;
  double cos_std = 0.0;
  std::vector<Vector> vectors;  // subject-major, size subjects*impressions

  const Vector& at(std::uint32_t subject, std::uint32_t impression) const;
  std::size_t flat_index(std::uint32_t subject,
                         std::uint32_t impression) const {
    return std::size_t(subject) * impressions + impression;
  }
};

// (x, x') with cosine(x, x') equal to target_cos up to 1e-10: x is a raw
// standard-normal draw, x' a unit vector built from x-hat and a random
// orthogonal direction.
std::pair<Vector, Vector> gen_pair(std::uint32_t d, double target_cos,
                                   std::mt19937_64& rng);

// Per-impression latent cosines are drawn so that the pairwise
// within-subject mean lands on cos_mean: two impressions at latent cosine
// c have pairwise cosine ~ c^2, so draws center on sqrt(cos_mean).
Population gen_population(std::uint32_t subjects, std::uint32_t impressions,
                          std::uint32_t d, double cos_mean, double cos_std,
                          std::uint64_t seed);

// Pairs of flat vector indices.
struct ProtocolPairs {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> genuine;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> imposter;
};

// Genuine: all C(I,2) within-subject pairs for every subject.
// Imposter: first impressions, all C(S,2) cross-subject pairs.
ProtocolPairs full_protocol(const Population& pop);

// Genuine: (impression 1, impression 2) per subject; imposter as above.
ProtocolPairs one_vs_one_protocol(const Population& pop);

// Pairwise-orthonormal subject vectors (QR of a seeded Gaussian matrix);
// requires count <= d. Used where cross-subject similarity must sit
// exactly at the independence baseline.
std::vector<Vector> orthonormal_vectors(std::uint32_t count, std::uint32_t d,
                                        std::uint64_t seed);

// CSV, one vector per line, comma-separated decimal floats. Round-trips
// preserve values to 1e-12 relative.
std::vector<Vector> load_vectors(const std::string& path);
void save_vectors(const std::vector<Vector>& vectors, const std::string& path);

}  // namespace ske::dataset
