#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "ske/errors.hpp"

namespace ske::rsv {

// 128-bit seed identifying one independent stream of random projection
// matrices. Only the seed is ever persisted; matrix entries are derived
// on demand from (seed, i, r, c).
struct Nonce {
  std::array<std::uint8_t, 16> seed{};

  static Nonce from_words(std::uint64_t hi, std::uint64_t lo);

  // Deterministic child nonce, used for enrollment reseeding and for
  // expanding one master seed into independent per-use nonces.
  Nonce derive(std::uint64_t counter) const;

  std::uint64_t hi_word() const;
  std::uint64_t lo_word() const;

  bool operator==(const Nonce&) const = default;
  auto operator<=>(const Nonce&) const = default;
};

// Output of the index-of-max hash: m indices, each in {0, ..., F-1}.
struct ResilientVector {
  std::uint32_t F = 0;
  std::vector<std::uint32_t> entries;

  std::size_t m() const { return entries.size(); }
  bool operator==(const ResilientVector&) const = default;
};

// Deterministic standard-normal variate for matrix i, row r, column c of
// the stream identified by nonce. Two uniforms in (0,1) come from a
// counter-keyed mix of (seed, i, r, c); the cosine branch of Box-Muller
// maps them to N(0,1). The exact derivation is documented in README.md so
// helper data stays portable across builds of this repo.
double derive_gaussian_entry(const Nonce& nonce, std::uint32_t i,
                             std::uint32_t r, std::uint32_t c);

// Streams the m projection matrices of one nonce and applies them to one
// or many input vectors. Matrix blocks are generated per index and
// discarded, so memory stays O(F*d) regardless of m; batching amortizes
// the generation cost across all vectors of a campaign.
class Projector {
public:
  Projector(Nonce nonce, std::uint32_t m, std::uint32_t F, std::uint32_t d);

  ResilientVector hash(std::span<const double> x) const;

  std::vector<ResilientVector> hash_batch(
      std::span<const std::vector<double>> xs) const;

  const Nonce& nonce() const { return nonce_; }
  std::uint32_t m() const { return m_; }
  std::uint32_t F() const { return F_; }
  std::uint32_t d() const { return d_; }

private:
  Nonce nonce_;
  std::uint32_t m_;
  std::uint32_t F_;
  std::uint32_t d_;
};

// entries[i] = argmax_r <Y_i[r,:], x>, ties broken toward the smallest
// index. Inputs are direction-normalized, so iom_hash(x) == iom_hash(c*x)
// for c > 0.
ResilientVector iom_hash(std::span<const double> x, std::uint32_t m,
                         std::uint32_t F, const Nonce& nonce);

// Number of positions where the two vectors agree.
std::uint32_t collision_count(const ResilientVector& a,
                              const ResilientVector& b);

// Empirical estimate of the per-index collision probability S(x, x').
double estimate_similarity(std::span<const double> x,
                           std::span<const double> xprime,
                           std::uint32_t m_probe, std::uint32_t F,
                           const Nonce& nonce);

}  // namespace ske::rsv
