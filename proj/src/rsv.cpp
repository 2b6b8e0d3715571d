#include "ske/rsv.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

namespace ske::rsv {
namespace {

// Stafford mix 13 finalizer: the avalanche core of the counter-keyed
// derivation. The full tuple layout is documented in README.md.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

constexpr std::uint64_t kIndexSalt = 0xA24BAED4963EE407ULL;
constexpr std::uint64_t kRowSalt = 0x9FB21C651E98DF25ULL;
constexpr std::uint64_t kColSalt = 0xD6E8FEB86659FD93ULL;

inline std::uint64_t absorb(std::uint64_t h, std::uint64_t v,
                            std::uint64_t salt) {
  return mix64(h ^ (v * salt));
}

// 64-bit word -> uniform in the open interval (0,1): 53 high bits plus a
// half-ulp offset, so log() never sees zero.
inline double to_unit(std::uint64_t w) {
  return (double(w >> 11) + 0.5) * 0x1.0p-53;
}

// Cosine branch of Box-Muller. Both the scalar reference and the block
// generator run through this exact function, so projection matrices are
// bit-identical no matter which path derives them.
inline double gaussian_from_state(std::uint64_t h, std::uint64_t key1) {
  const double u1 = to_unit(mix64(h ^ key1));
  const double u2 = to_unit(mix64(h ^ ~key1));
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

Nonce Nonce::from_words(std::uint64_t hi, std::uint64_t lo) {
  Nonce n;
  for (int b = 0; b < 8; ++b) {
    n.seed[b] = std::uint8_t(hi >> (56 - 8 * b));
    n.seed[8 + b] = std::uint8_t(lo >> (56 - 8 * b));
  }
  return n;
}

Nonce Nonce::derive(std::uint64_t counter) const {
  std::uint64_t a = mix64(hi_word() ^ mix64(counter ^ 0x5851F42D4C957F2DULL));
  std::uint64_t b = mix64(lo_word() ^ mix64(counter ^ 0x14057B7EF767814FULL));
  return from_words(a, b);
}

std::uint64_t Nonce::hi_word() const {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v = (v << 8) | seed[b];
  return v;
}

std::uint64_t Nonce::lo_word() const {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v = (v << 8) | seed[8 + b];
  return v;
}

double derive_gaussian_entry(const Nonce& nonce, std::uint32_t i,
                             std::uint32_t r, std::uint32_t c) {
  std::uint64_t h = absorb(nonce.hi_word(), i, kIndexSalt);
  h = absorb(h, r, kRowSalt);
  h = mix64(h ^ (std::uint64_t(c) * kColSalt));
  return gaussian_from_state(h, nonce.lo_word());
}

Projector::Projector(Nonce nonce, std::uint32_t m, std::uint32_t F,
                     std::uint32_t d)
    : nonce_(nonce), m_(m), F_(F), d_(d) {
  if (m < 1) throw DomainError("hash count m must be >= 1");
  if (F < 2) throw DomainError("index range F must be >= 2");
  if (d < 1) throw DomainError("input dimension d must be >= 1");
}

namespace {

Eigen::MatrixXf normalized_columns(std::span<const std::vector<double>> xs,
                                   std::uint32_t d) {
  Eigen::MatrixXf X(d, Eigen::Index(xs.size()));
  for (std::size_t n = 0; n < xs.size(); ++n) {
    if (xs[n].size() != d) {
      throw ShapeMismatchError("input vector has dimension " +
                               std::to_string(xs[n].size()) + ", expected " +
                               std::to_string(d));
    }
    Eigen::Map<const Eigen::VectorXd> v(xs[n].data(), d);
    const double norm = v.norm();
    if (norm == 0.0) {
      throw ZeroVectorError("argmax hash is undefined for the zero vector");
    }
    X.col(Eigen::Index(n)) = (v / norm).cast<float>();
  }
  return X;
}

}  // namespace

std::vector<ResilientVector> Projector::hash_batch(
    std::span<const std::vector<double>> xs) const {
  if (xs.empty()) return {};
  const Eigen::MatrixXf X = normalized_columns(xs, d_);
  const Eigen::Index n_cols = X.cols();
  const std::uint64_t key0 = nonce_.hi_word();
  const std::uint64_t key1 = nonce_.lo_word();

  std::vector<ResilientVector> out(static_cast<std::size_t>(n_cols));
  for (auto& rv : out) {
    rv.F = F_;
    rv.entries.resize(m_);
  }

  // One F x d block per matrix index: generate, project every input,
  // record the first-maximum row, discard. Memory stays O(F*d + F*N).
  Eigen::MatrixXf block(F_, d_);
  Eigen::MatrixXf scores(F_, n_cols);
  for (std::uint32_t i = 0; i < m_; ++i) {
    const std::uint64_t hi = absorb(key0, i, kIndexSalt);
    for (std::uint32_t r = 0; r < F_; ++r) {
      const std::uint64_t hr = absorb(hi, r, kRowSalt);
      for (std::uint32_t c = 0; c < d_; ++c) {
        const std::uint64_t hc = mix64(hr ^ (std::uint64_t(c) * kColSalt));
        block(r, c) = float(gaussian_from_state(hc, key1));
      }
    }
    scores.noalias() = block * X;
    for (Eigen::Index n = 0; n < n_cols; ++n) {
      const float* col = &scores(0, n);
      std::uint32_t best = 0;
      float best_value = col[0];
      for (std::uint32_t r = 1; r < F_; ++r) {
        if (col[r] > best_value) {  // ties keep the smallest index
          best_value = col[r];
          best = r;
        }
      }
      out[std::size_t(n)].entries[i] = best;
    }
  }
  return out;
}

ResilientVector Projector::hash(std::span<const double> x) const {
  std::vector<std::vector<double>> one{std::vector<double>(x.begin(), x.end())};
  return hash_batch(one).front();
}

ResilientVector iom_hash(std::span<const double> x, std::uint32_t m,
                         std::uint32_t F, const Nonce& nonce) {
  return Projector(nonce, m, F, std::uint32_t(x.size())).hash(x);
}

std::uint32_t collision_count(const ResilientVector& a,
                              const ResilientVector& b) {
  if (a.m() != b.m() || a.F != b.F) {
    throw ShapeMismatchError("resilient vectors disagree on (m, F)");
  }
  std::uint32_t t = 0;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    t += a.entries[i] == b.entries[i];
  }
  return t;
}

double estimate_similarity(std::span<const double> x,
                           std::span<const double> xprime,
                           std::uint32_t m_probe, std::uint32_t F,
                           const Nonce& nonce) {
  if (x.size() != xprime.size()) {
    throw ShapeMismatchError("similarity inputs disagree on dimension");
  }
  Projector proj(nonce, m_probe, F, std::uint32_t(x.size()));
  std::vector<std::vector<double>> pair{
      std::vector<double>(x.begin(), x.end()),
      std::vector<double>(xprime.begin(), xprime.end())};
  auto rvs = proj.hash_batch(pair);
  return double(collision_count(rvs[0], rvs[1])) / double(m_probe);
}

}  // namespace ske::rsv
