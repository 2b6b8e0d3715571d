#include "ske/ske.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <map>
#include <tuple>

namespace ske {
namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(std::uint8_t(v >> 8));
  out.push_back(std::uint8_t(v));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(std::uint8_t(v >> 24));
  out.push_back(std::uint8_t(v >> 16));
  out.push_back(std::uint8_t(v >> 8));
  out.push_back(std::uint8_t(v));
}

class Reader {
public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint16_t u16() { return std::uint16_t((byte() << 8) | byte()); }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | byte();
    return v;
  }
  void raw(std::uint8_t* dst, std::size_t n) {
    if (pos_ + n > bytes_.size()) {
      throw MalformedContainerError("helper container truncated");
    }
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  bool exhausted() const { return pos_ == bytes_.size(); }

private:
  std::uint8_t byte() {
    if (pos_ >= bytes_.size()) {
      throw MalformedContainerError("helper container truncated");
    }
    return bytes_[pos_++];
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

const std::uint8_t kMagic[4] = {'S', 'K', 'E', '1'};
constexpr std::uint16_t kFormatVersion = 1;

struct Sha256 {
  Sha256() : ctx(EVP_MD_CTX_new()) {
    if (!ctx) throw Error("failed to allocate digest context");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void digest(const std::uint8_t* msg, std::size_t len, std::uint8_t out[32]) {
    unsigned int out_len = 32;
    if (EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, msg, len) != 1 ||
        EVP_DigestFinal_ex(ctx, out, &out_len) != 1) {
      throw Error("SHA-256 computation failed");
    }
  }

  EVP_MD_CTX* ctx;
};

// Canonical tag preimage: domain-separated 2-byte big-endian operands.
void encode_tag_input(std::uint32_t phi, std::uint32_t ss,
                      std::uint32_t phihat, std::uint8_t out[9]) {
  out[0] = 0x01;
  out[1] = std::uint8_t(phi >> 8);
  out[2] = std::uint8_t(phi);
  out[3] = 0x02;
  out[4] = std::uint8_t(ss >> 8);
  out[5] = std::uint8_t(ss);
  out[6] = 0x03;
  out[7] = std::uint8_t(phihat >> 8);
  out[8] = std::uint8_t(phihat);
}

std::uint32_t unique_count(const std::vector<std::uint32_t>& entries) {
  std::vector<std::uint32_t> sorted(entries);
  std::sort(sorted.begin(), sorted.end());
  return std::uint32_t(std::unique(sorted.begin(), sorted.end()) -
                       sorted.begin());
}

void fill_tags(std::vector<std::uint8_t>& tags, const SkeParams& params,
               const std::vector<std::uint32_t>& phi,
               const std::vector<std::uint16_t>& sketch,
               const std::vector<std::uint32_t>& phihat) {
  const std::size_t tag_bytes = params.tag_bytes();
  tags.resize(std::size_t(params.m) * tag_bytes);
  Sha256 sha;
  std::uint8_t msg[9];
  std::uint8_t full[32];
  for (std::uint32_t i = 0; i < params.m; ++i) {
    encode_tag_input(phi[i], sketch[i], phihat[i], msg);
    sha.digest(msg, sizeof(msg), full);
    std::memcpy(tags.data() + std::size_t(i) * tag_bytes, full, tag_bytes);
  }
}

HelperData assemble_helper(const SkeParams& params, const rsv::Nonce& nonce_n,
                           const rsv::Nonce& nonce_nhat,
                           const std::vector<std::uint32_t>& phi,
                           const std::vector<std::uint32_t>& phihat,
                           const field::FieldPoly& poly) {
  HelperData helper;
  helper.params = params;
  helper.nonce_n = nonce_n;
  helper.nonce_nhat = nonce_nhat;
  helper.sketch.resize(params.m);
  for (std::uint32_t i = 0; i < params.m; ++i) {
    const std::uint32_t y = field::poly_eval(poly, phi[i]);
    helper.sketch[i] = std::uint16_t(phihat[i] ^ y);
  }
  fill_tags(helper.tags, params, phi, helper.sketch, phihat);
  return helper;
}

}  // namespace

void SkeParams::validate() const {
  if (d < 1) throw DomainError("input dimension d must be >= 1");
  if (m < 1) throw DomainError("hash count m must be >= 1");
  field::FieldParams check(p);
  if (k < 1 || k > m) {
    throw DomainError("secret length k must satisfy 1 <= k <= m");
  }
  if (k > p) {
    throw DomainError("secret length k must not exceed the field size p");
  }
  if (ell_bits < 128 || ell_bits > 256 || ell_bits % 8 != 0) {
    throw DomainError("tag length must be 128..256 bits, a multiple of 8");
  }
}

std::uint32_t SkeParams::sketch_bits() const {
  return std::uint32_t(std::bit_width(p - 1));
}

std::vector<std::uint8_t> compute_tag(std::uint32_t phi, std::uint32_t ss,
                                      std::uint32_t phihat,
                                      std::uint32_t ell_bits) {
  if (ell_bits < 128 || ell_bits > 256 || ell_bits % 8 != 0) {
    throw DomainError("tag length must be 128..256 bits, a multiple of 8");
  }
  if (phi > 0xffff || ss > 0xffff || phihat > 0xffff) {
    throw DomainError("tag operands must fit 16 bits");
  }
  std::uint8_t msg[9];
  std::uint8_t full[32];
  encode_tag_input(phi, ss, phihat, msg);
  Sha256 sha;
  sha.digest(msg, sizeof(msg), full);
  return std::vector<std::uint8_t>(full, full + ell_bits / 8);
}

HelperData enroll(std::span<const double> x,
                  std::span<const std::uint8_t> secret, const SkeParams& params,
                  const rsv::Nonce& nonce_n, const rsv::Nonce& nonce_nhat) {
  params.validate();
  if (x.size() != params.d) {
    throw ShapeMismatchError("input vector dimension does not match params.d");
  }
  if (nonce_n == nonce_nhat) {
    throw DomainError("the two nonces must be distinct");
  }
  const field::FieldPoly poly = field::encode_secret(secret, params.k, params.p);

  const auto phihat = rsv::iom_hash(x, params.m, params.p, nonce_nhat);
  rsv::Nonce active = nonce_n;
  for (std::uint32_t attempt = 0;; ++attempt) {
    const auto phi = rsv::iom_hash(x, params.m, params.p, active);
    if (unique_count(phi.entries) >= params.k) {
      return assemble_helper(params, active, nonce_nhat, phi.entries,
                             phihat.entries, poly);
    }
    if (attempt >= params.max_reseed) {
      throw InsufficientDiversityError(
          "fewer than k distinct hash indices after " +
          std::to_string(params.max_reseed) + " reseeds");
    }
    active = nonce_n.derive(attempt + 1);
    if (active == nonce_nhat) active = active.derive(1);
  }
}

UnlockingSet filter_unlock(std::span<const std::uint8_t> tags,
                           std::span<const std::uint8_t> tags_prime,
                           std::span<const std::uint32_t> phi_prime,
                           std::span<const std::uint32_t> phihat_prime,
                           std::span<const std::uint16_t> ss,
                           const SkeParams& params) {
  const std::size_t tag_bytes = params.tag_bytes();
  const std::size_t m = params.m;
  if (tags.size() != m * tag_bytes || tags_prime.size() != m * tag_bytes ||
      phi_prime.size() != m || phihat_prime.size() != m || ss.size() != m) {
    throw ShapeMismatchError("filter inputs disagree on m");
  }

  UnlockingSet set;
  std::vector<bool> seen(params.p, false);
  for (std::size_t i = 0; i < m; ++i) {
    if (std::memcmp(tags.data() + i * tag_bytes,
                    tags_prime.data() + i * tag_bytes, tag_bytes) != 0) {
      continue;
    }
    ++set.matched;
    const std::uint32_t xcoord = phi_prime[i];
    const std::uint32_t y = std::uint32_t(ss[i]) ^ phihat_prime[i];
    if (xcoord >= params.p || y >= params.p) continue;  // defensive drop
    if (seen[xcoord]) continue;  // Unique(): first occurrence wins
    seen[xcoord] = true;
    set.pairs.push_back({xcoord, y});
  }
  return set;
}

RetrieveOutcome retrieve(std::span<const double> xprime,
                         const HelperData& helper) {
  const SkeParams& params = helper.params;
  params.validate();
  if (xprime.size() != params.d) {
    throw ShapeMismatchError("query vector dimension does not match params.d");
  }
  std::vector<std::vector<double>> one{
      std::vector<double>(xprime.begin(), xprime.end())};
  return retrieve_batch(one, std::span<const HelperData>(&helper, 1)).front();
}

std::vector<HelperData> enroll_batch(
    std::span<const std::vector<double>> xs,
    std::span<const std::vector<std::uint8_t>> secrets, const SkeParams& params,
    const rsv::Nonce& nonce_n, const rsv::Nonce& nonce_nhat) {
  params.validate();
  if (xs.size() != secrets.size()) {
    throw ShapeMismatchError("one secret per input vector required");
  }
  if (nonce_n == nonce_nhat) {
    throw DomainError("the two nonces must be distinct");
  }
  std::vector<field::FieldPoly> polys;
  polys.reserve(xs.size());
  for (const auto& secret : secrets) {
    polys.push_back(field::encode_secret(secret, params.k, params.p));
  }

  rsv::Projector proj_n(nonce_n, params.m, params.p, params.d);
  rsv::Projector proj_nhat(nonce_nhat, params.m, params.p, params.d);
  const auto phis = proj_n.hash_batch(xs);
  const auto phihats = proj_nhat.hash_batch(xs);

  std::vector<HelperData> out;
  out.reserve(xs.size());
  for (std::size_t n = 0; n < xs.size(); ++n) {
    if (unique_count(phis[n].entries) >= params.k) {
      out.push_back(assemble_helper(params, nonce_n, nonce_nhat,
                                    phis[n].entries, phihats[n].entries,
                                    polys[n]));
    } else {
      // rare: fall back to the reseeding single-item path
      out.push_back(enroll(xs[n], secrets[n], params, nonce_n, nonce_nhat));
    }
  }
  return out;
}

std::vector<RetrieveOutcome> retrieve_batch(
    std::span<const std::vector<double>> queries,
    std::span<const HelperData> helpers) {
  if (queries.size() != helpers.size()) {
    throw ShapeMismatchError("one helper per query required");
  }
  std::vector<RetrieveOutcome> out(queries.size());
  if (queries.empty()) return out;

  // Group by nonce pair and geometry so each group is hashed in one pass.
  using GroupKey = std::tuple<rsv::Nonce, rsv::Nonce, std::uint32_t,
                              std::uint32_t, std::uint32_t>;
  std::map<GroupKey, std::vector<std::size_t>> groups;
  for (std::size_t n = 0; n < queries.size(); ++n) {
    const SkeParams& params = helpers[n].params;
    params.validate();
    if (helpers[n].sketch.size() != params.m ||
        helpers[n].tags.size() != std::size_t(params.m) * params.tag_bytes()) {
      throw InvariantViolationError("helper data arrays disagree with m");
    }
    if (queries[n].size() != params.d) {
      throw ShapeMismatchError(
          "query vector dimension does not match params.d");
    }
    groups[{helpers[n].nonce_n, helpers[n].nonce_nhat, params.m, params.p,
            params.d}]
        .push_back(n);
  }

  Sha256 sha;
  for (const auto& [key, idx] : groups) {
    const auto& [nonce_n, nonce_nhat, m, p, d] = key;
    std::vector<std::vector<double>> xs;
    xs.reserve(idx.size());
    for (std::size_t n : idx) xs.push_back(queries[n]);
    rsv::Projector proj_n(nonce_n, m, p, d);
    rsv::Projector proj_nhat(nonce_nhat, m, p, d);
    const auto phis = proj_n.hash_batch(xs);
    const auto phihats = proj_nhat.hash_batch(xs);

    for (std::size_t g = 0; g < idx.size(); ++g) {
      const std::size_t n = idx[g];
      const HelperData& helper = helpers[n];
      const SkeParams& params = helper.params;
      std::vector<std::uint8_t> tags_prime;
      fill_tags(tags_prime, params, phis[g].entries, helper.sketch,
                phihats[g].entries);
      const UnlockingSet set =
          filter_unlock(helper.tags, tags_prime, phis[g].entries,
                        phihats[g].entries, helper.sketch, params);

      RetrieveOutcome& outcome = out[n];
      outcome.matched = set.matched;
      outcome.unique_pairs = std::uint32_t(set.pairs.size());
      outcome.needed = params.k;
      if (set.pairs.size() >= params.k) {
        const field::FieldPoly poly =
            field::lagrange_interpolate(set.pairs, params.k, params.p);
        outcome.secret = field::decode_secret(poly);
      }
    }
  }
  return out;
}

std::vector<std::uint8_t> serialize_helper(const HelperData& helper) {
  const SkeParams& params = helper.params;
  params.validate();
  if (helper.nonce_n == helper.nonce_nhat) {
    throw InvariantViolationError("helper nonces must be distinct");
  }
  if (helper.sketch.size() != params.m ||
      helper.tags.size() != std::size_t(params.m) * params.tag_bytes()) {
    throw InvariantViolationError("helper data arrays disagree with m");
  }
  const std::uint32_t width = params.sketch_bytes();
  const std::uint32_t limit_bits = params.sketch_bits();
  for (std::uint16_t v : helper.sketch) {
    if (limit_bits < 16 && (v >> limit_bits) != 0) {
      throw InvariantViolationError("sketch value exceeds declared bit width");
    }
  }

  std::vector<std::uint8_t> out;
  out.reserve(52 + std::size_t(params.m) * (width + params.tag_bytes()));
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u16(out, helper.format_version);
  put_u32(out, params.d);
  put_u32(out, params.m);
  put_u16(out, std::uint16_t(params.p));
  put_u16(out, std::uint16_t(params.k));
  put_u16(out, std::uint16_t(params.ell_bits));
  out.insert(out.end(), helper.nonce_n.seed.begin(), helper.nonce_n.seed.end());
  out.insert(out.end(), helper.nonce_nhat.seed.begin(),
             helper.nonce_nhat.seed.end());
  for (std::uint16_t v : helper.sketch) {
    if (width == 2) out.push_back(std::uint8_t(v >> 8));
    out.push_back(std::uint8_t(v));
  }
  out.insert(out.end(), helper.tags.begin(), helper.tags.end());
  return out;
}

HelperData deserialize_helper(std::span<const std::uint8_t> bytes) {
  Reader reader(bytes);
  std::uint8_t magic[4];
  reader.raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw MalformedContainerError("bad helper container magic");
  }
  HelperData helper;
  helper.format_version = reader.u16();
  if (helper.format_version != kFormatVersion) {
    throw VersionUnsupportedError("unsupported helper container version " +
                                  std::to_string(helper.format_version));
  }
  helper.params.d = reader.u32();
  helper.params.m = reader.u32();
  helper.params.p = reader.u16();
  helper.params.k = reader.u16();
  helper.params.ell_bits = reader.u16();
  try {
    helper.params.validate();
  } catch (const DomainError& e) {
    throw InvariantViolationError(std::string("helper parameters invalid: ") +
                                  e.what());
  }
  reader.raw(helper.nonce_n.seed.data(), 16);
  reader.raw(helper.nonce_nhat.seed.data(), 16);
  if (helper.nonce_n == helper.nonce_nhat) {
    throw InvariantViolationError("helper nonces must be distinct");
  }

  const std::uint32_t width = helper.params.sketch_bytes();
  const std::uint32_t limit_bits = helper.params.sketch_bits();
  helper.sketch.resize(helper.params.m);
  for (std::uint32_t i = 0; i < helper.params.m; ++i) {
    std::uint16_t v = 0;
    std::uint8_t raw[2] = {0, 0};
    reader.raw(raw, width);
    v = width == 2 ? std::uint16_t((raw[0] << 8) | raw[1]) : raw[0];
    if (limit_bits < 16 && (v >> limit_bits) != 0) {
      throw InvariantViolationError("sketch value exceeds declared bit width");
    }
    helper.sketch[i] = v;
  }
  helper.tags.resize(std::size_t(helper.params.m) * helper.params.tag_bytes());
  reader.raw(helper.tags.data(), helper.tags.size());
  if (!reader.exhausted()) {
    throw MalformedContainerError("trailing bytes after helper container");
  }
  return helper;
}

}  // namespace ske
