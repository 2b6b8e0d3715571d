#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ske/field.hpp"
#include "ske/rsv.hpp"

namespace ske {

struct SkeParams {
  std::uint32_t d = 0;         // input vector dimension
  std::uint32_t m = 0;         // resilient-vector length
  std::uint32_t p = 0;         // prime field size
  std::uint32_t k = 0;         // secret length in field elements
  std::uint32_t ell_bits = 0;  // tag length in bits
  std::uint32_t max_reseed = 8;

  // Throws DomainError unless: p prime, 1 <= k <= m, k <= p,
  // ell_bits in {128..256} and a multiple of 8, m >= 1, d >= 1.
  void validate() const;

  // Width of one sketch value: ceil(log2 p) bits, in whole bytes.
  std::uint32_t sketch_bits() const;
  std::uint32_t sketch_bytes() const { return (sketch_bits() + 7) / 8; }
  std::uint32_t tag_bytes() const { return ell_bits / 8; }

  bool operator==(const SkeParams&) const = default;
};

// Public record stored after enrollment: {nonce seeds, secure sketch,
// tag list, parameters}. sketch[i] = phihat[i] XOR f(phi[i]) on the
// sketch_bits()-wide encodings; values >= p are legal ciphertext.
struct HelperData {
  std::uint16_t format_version = 1;
  SkeParams params;
  rsv::Nonce nonce_n;
  rsv::Nonce nonce_nhat;
  std::vector<std::uint16_t> sketch;  // m values, each < 2^sketch_bits()
  std::vector<std::uint8_t> tags;     // m * tag_bytes(), concatenated

  bool operator==(const HelperData&) const = default;
};

struct UnlockingSet {
  std::vector<field::Point> pairs;  // distinct x-coordinates
  std::uint32_t matched = 0;        // tag matches before deduplication

  std::size_t size() const { return pairs.size(); }
};

struct RetrieveOutcome {
  std::optional<std::vector<std::uint8_t>> secret;
  std::uint32_t matched = 0;       // tag-match count over the m indices
  std::uint32_t unique_pairs = 0;  // |U| after deduplication
  std::uint32_t needed = 0;        // k

  bool success() const { return secret.has_value(); }
};

// tag = first ell_bits of SHA-256 over the canonical encoding
// 0x01 || phi(2B BE) || 0x02 || ss(2B BE) || 0x03 || phihat(2B BE).
std::vector<std::uint8_t> compute_tag(std::uint32_t phi, std::uint32_t ss,
                                      std::uint32_t phihat,
                                      std::uint32_t ell_bits);

// Binds the secret to x. Requires distinct nonces and at least k distinct
// values in phi; on a diversity shortfall the phi nonce is re-derived up
// to params.max_reseed times before InsufficientDiversityError.
HelperData enroll(std::span<const double> x,
                  std::span<const std::uint8_t> secret, const SkeParams& params,
                  const rsv::Nonce& nonce_n, const rsv::Nonce& nonce_nhat);

// Tag-filtered decryption: indices with tags[i] == tags_prime[i] decrypt
// to (phi_prime[i], ss[i] XOR phihat_prime[i]); the result keeps the first
// occurrence per x-coordinate and drops any pair with a coordinate >= p.
UnlockingSet filter_unlock(std::span<const std::uint8_t> tags,
                           std::span<const std::uint8_t> tags_prime,
                           std::span<const std::uint32_t> phi_prime,
                           std::span<const std::uint32_t> phihat_prime,
                           std::span<const std::uint16_t> ss,
                           const SkeParams& params);

RetrieveOutcome retrieve(std::span<const double> xprime,
                         const HelperData& helper);

// Campaign helpers: all items share one nonce pair so the projection
// streams are generated once per batch. Items that fail the diversity
// check fall back to per-item reseeded enrollment.
std::vector<HelperData> enroll_batch(
    std::span<const std::vector<double>> xs,
    std::span<const std::vector<std::uint8_t>> secrets, const SkeParams& params,
    const rsv::Nonce& nonce_n, const rsv::Nonce& nonce_nhat);

// queries[i] is evaluated against helpers[i]; queries sharing a helper
// nonce pair are hashed together.
std::vector<RetrieveOutcome> retrieve_batch(
    std::span<const std::vector<double>> queries,
    std::span<const HelperData> helpers);

// Bit-exact container, all integers big-endian:
//   "SKE1" | version u16 | d u32 | m u32 | p u16 | k u16 | ell u16 |
//   seed_n 16B | seed_nhat 16B | ss m*sketch_bytes | tags m*(ell/8).
std::vector<std::uint8_t> serialize_helper(const HelperData& helper);
HelperData deserialize_helper(std::span<const std::uint8_t> bytes);

}  // namespace ske
