#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "ske/dataset.hpp"
#include "ske/ske.hpp"

using namespace ske;
using rsv::Nonce;

namespace {

const Nonce kNonceN = Nonce::from_words(0x1111111111111111ULL, 0x2222222222222222ULL);
const Nonce kNonceNhat = Nonce::from_words(0x3333333333333333ULL, 0x4444444444444444ULL);

SkeParams small_params() {
  SkeParams params;
  params.d = 8;
  params.m = 64;
  params.p = 251;
  params.k = 8;
  params.ell_bits = 128;
  return params;
}

std::vector<double> random_vector(std::uint32_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> x(d);
  for (auto& v : x) v = normal(rng);
  return x;
}

std::vector<std::uint8_t> random_secret(std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> byte(0, 255);
  std::vector<std::uint8_t> s(n);
  for (auto& b : s) b = std::uint8_t(byte(rng));
  return s;
}

}  // namespace

TEST_CASE("params validation") {
  SkeParams params = small_params();
  CHECK_NOTHROW(params.validate());

  SkeParams bad = params;
  bad.k = 65;  // > m
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = params;
  bad.p = 252;  // composite
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = params;
  bad.m = 300;
  bad.k = 260;  // > p
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = params;
  bad.ell_bits = 120;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = params;
  bad.ell_bits = 130;  // not a byte multiple
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = params;
  bad.d = 0;
  CHECK_THROWS_AS(bad.validate(), DomainError);

  CHECK(params.sketch_bits() == 8);
  CHECK(params.sketch_bytes() == 1);
  params.p = 65521;
  CHECK(params.sketch_bits() == 16);
  CHECK(params.sketch_bytes() == 2);
  params.p = 5;
  CHECK(params.sketch_bits() == 3);
}

TEST_CASE("tag computation") {
  const auto tag = compute_tag(3, 0, 2, 128);
  CHECK(tag.size() == 16);
  CHECK(tag == compute_tag(3, 0, 2, 128));
  CHECK(tag != compute_tag(2, 0, 3, 128));  // order sensitivity

  const auto longer = compute_tag(3, 0, 2, 256);
  CHECK(longer.size() == 32);
  CHECK(std::equal(tag.begin(), tag.end(), longer.begin()));

  CHECK_THROWS_AS(compute_tag(3, 0, 2, 64), DomainError);
  CHECK_THROWS_AS(compute_tag(0x10000, 0, 2, 128), DomainError);
}

TEST_CASE("single-bit flips change the tag") {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<std::uint32_t> val(0, 0xffff);
  std::uniform_int_distribution<int> which(0, 2), bit(0, 15);
  for (int trial = 0; trial < 1000; ++trial) {
    std::uint32_t v[3] = {val(rng), val(rng), val(rng)};
    const auto base = compute_tag(v[0], v[1], v[2], 128);
    const int w = which(rng);
    v[w] ^= 1u << bit(rng);
    CHECK(base != compute_tag(v[0], v[1], v[2], 128));
  }
}

TEST_CASE("xor involution over all sketch widths up to 8 bits") {
  for (std::uint32_t a = 0; a < 256; ++a) {
    for (std::uint32_t b = 0; b < 256; ++b) {
      CHECK(((a ^ b) ^ b) == a);
    }
  }
}

TEST_CASE("enroll/retrieve round trip is exact") {
  std::mt19937_64 rng(17);
  const SkeParams params = small_params();
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_vector(params.d, rng);
    const auto secret = random_secret(7, rng);  // 7 bytes < 251^8
    const auto helper = enroll(x, secret, params, kNonceN.derive(trial),
                               kNonceNhat.derive(trial));
    const auto outcome = retrieve(x, helper);
    REQUIRE(outcome.success());
    CHECK(*outcome.secret == secret);
    CHECK(outcome.unique_pairs >= params.k);
    CHECK(outcome.matched == params.m);  // identical query matches every tag
  }
}

TEST_CASE("enrollment always succeeds at k=1") {
  std::mt19937_64 rng(19);
  SkeParams params = small_params();
  params.m = 8;
  params.k = 1;
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = random_vector(params.d, rng);
    const std::vector<std::uint8_t> secret{std::uint8_t(trial)};
    CHECK_NOTHROW(enroll(x, secret, params, kNonceN.derive(trial),
                         kNonceNhat.derive(trial)));
  }
}

TEST_CASE("hash-index occupancy keeps diversity failures negligible") {
  // Occupancy oracle: throwing m=1024 balls into p=251 bins leaves
  // p(1-(1-1/p)^m) ~ 246.8 distinct values on average, far above k=54.
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> bin(0, 250);
  const double expected = 251.0 * (1.0 - std::pow(1.0 - 1.0 / 251.0, 1024.0));
  double sum = 0.0;
  int min_unique = 251;
  const int trials = 20000;
  for (int trial = 0; trial < trials; ++trial) {
    std::set<int> seen;
    for (int i = 0; i < 1024; ++i) seen.insert(bin(rng));
    sum += double(seen.size());
    min_unique = std::min(min_unique, int(seen.size()));
  }
  CHECK(std::abs(sum / trials - expected) < 0.5);
  CHECK(min_unique > 2 * 54);
}

TEST_CASE("insufficient diversity reseeds and eventually fails") {
  SkeParams params;
  params.d = 4;
  params.m = 2;
  params.p = 2;
  params.k = 2;
  params.ell_bits = 128;
  params.max_reseed = 0;

  std::mt19937_64 rng(29);
  const std::vector<std::uint8_t> secret{1};

  // With F=2 and m=2 roughly half of all enrollments hit a duplicate
  // index; locate one failing and one passing seed.
  bool found_failure = false, found_success = false;
  for (int trial = 0; trial < 200 && !(found_failure && found_success);
       ++trial) {
    const auto x = random_vector(params.d, rng);
    try {
      const auto helper =
          enroll(x, secret, params, kNonceN.derive(trial), kNonceNhat);
      found_success = true;
      const auto outcome = retrieve(x, helper);
      CHECK(outcome.success());
      CHECK(*outcome.secret == secret);
    } catch (const InsufficientDiversityError&) {
      found_failure = true;
      // retries rescue the same input
      SkeParams retry = params;
      retry.max_reseed = 32;
      CHECK_NOTHROW(enroll(x, secret, retry, kNonceN.derive(trial),
                           kNonceNhat));
    }
  }
  CHECK(found_failure);
  CHECK(found_success);
}

TEST_CASE("distinct nonces are required") {
  std::mt19937_64 rng(31);
  const SkeParams params = small_params();
  const auto x = random_vector(params.d, rng);
  CHECK_THROWS_AS(enroll(x, {}, params, kNonceN, kNonceN), DomainError);
}

TEST_CASE("secret too large is rejected before any hashing") {
  std::mt19937_64 rng(37);
  SkeParams params = small_params();
  params.k = 1;  // secrets must be < 251
  const auto x = random_vector(params.d, rng);
  const std::vector<std::uint8_t> big{0xff};
  CHECK_THROWS_AS(enroll(x, big, params, kNonceN, kNonceNhat),
                  SecretTooLargeError);
}

TEST_CASE("filter_unlock recovers genuine pairs") {
  std::mt19937_64 rng(41);
  const SkeParams params = small_params();
  const auto x = random_vector(params.d, rng);
  const auto secret = random_secret(7, rng);
  const auto helper = enroll(x, secret, params, kNonceN, kNonceNhat);

  const auto phi = rsv::iom_hash(x, params.m, params.p, helper.nonce_n);
  const auto phihat = rsv::iom_hash(x, params.m, params.p, helper.nonce_nhat);
  std::vector<std::uint8_t> tags_prime;
  for (std::uint32_t i = 0; i < params.m; ++i) {
    const auto tag = compute_tag(phi.entries[i], helper.sketch[i],
                                 phihat.entries[i], params.ell_bits);
    tags_prime.insert(tags_prime.end(), tag.begin(), tag.end());
  }

  SUBCASE("perfect match yields all unique pairs on the polynomial") {
    const auto set = filter_unlock(helper.tags, tags_prime, phi.entries,
                                   phihat.entries, helper.sketch, params);
    CHECK(set.matched == params.m);
    std::set<std::uint32_t> unique_x(phi.entries.begin(), phi.entries.end());
    CHECK(set.pairs.size() == unique_x.size());

    const auto poly = field::encode_secret(secret, params.k, params.p);
    for (const auto& pair : set.pairs) {
      CHECK(pair.y == field::poly_eval(poly, pair.x));
    }
  }

  SUBCASE("disjoint tags yield the empty set") {
    std::vector<std::uint8_t> mangled(tags_prime);
    for (auto& b : mangled) b ^= 0xff;
    const auto set = filter_unlock(helper.tags, mangled, phi.entries,
                                   phihat.entries, helper.sketch, params);
    CHECK(set.matched == 0);
    CHECK(set.pairs.empty());
  }

  SUBCASE("a single agreeing index yields exactly that pair") {
    std::vector<std::uint8_t> mangled(tags_prime);
    const std::size_t keep = 5;
    for (std::size_t i = 0; i < params.m; ++i) {
      if (i == keep) continue;
      mangled[i * params.tag_bytes()] ^= 0xff;
    }
    const auto set = filter_unlock(helper.tags, mangled, phi.entries,
                                   phihat.entries, helper.sketch, params);
    CHECK(set.matched == 1);
    REQUIRE(set.pairs.size() == 1);
    CHECK(set.pairs[0].x == phi.entries[keep]);
    const auto poly = field::encode_secret(secret, params.k, params.p);
    CHECK(set.pairs[0].y == field::poly_eval(poly, phi.entries[keep]));
    // decryption really is ss XOR phihat
    CHECK(set.pairs[0].y ==
          (std::uint32_t(helper.sketch[keep]) ^ phihat.entries[keep]));
  }

  SUBCASE("shape mismatches are rejected") {
    std::vector<std::uint16_t> short_ss(params.m - 1);
    CHECK_THROWS_AS(filter_unlock(helper.tags, tags_prime, phi.entries,
                                  phihat.entries, short_ss, params),
                    ShapeMismatchError);
  }
}

TEST_CASE("imposter queries fail with a small unlocking set") {
  std::mt19937_64 rng(43);
  SkeParams params = small_params();
  params.m = 256;
  params.k = 54;
  const auto pair = dataset::gen_pair(params.d, 0.0, rng);
  const auto secret = random_secret(7, rng);
  const auto helper = enroll(pair.first, secret, params, kNonceN, kNonceNhat);
  const auto outcome = retrieve(pair.second, helper);
  CHECK_FALSE(outcome.success());
  CHECK(outcome.needed == params.k);
  CHECK(outcome.unique_pairs < params.k / 2);
}

TEST_CASE("enrollment is deterministic") {
  std::mt19937_64 rng(47);
  const SkeParams params = small_params();
  const auto x = random_vector(params.d, rng);
  const auto secret = random_secret(7, rng);
  const auto a = enroll(x, secret, params, kNonceN, kNonceNhat);
  const auto b = enroll(x, secret, params, kNonceN, kNonceNhat);
  CHECK(a == b);
  CHECK(serialize_helper(a) == serialize_helper(b));
}

TEST_CASE("batch enroll and retrieve match the single-item path") {
  std::mt19937_64 rng(53);
  const SkeParams params = small_params();
  std::vector<std::vector<double>> xs;
  std::vector<std::vector<std::uint8_t>> secrets;
  for (int n = 0; n < 10; ++n) {
    xs.push_back(random_vector(params.d, rng));
    secrets.push_back(random_secret(7, rng));
  }
  const auto helpers = enroll_batch(xs, secrets, params, kNonceN, kNonceNhat);
  REQUIRE(helpers.size() == xs.size());
  for (std::size_t n = 0; n < xs.size(); ++n) {
    CHECK(helpers[n] == enroll(xs[n], secrets[n], params, kNonceN, kNonceNhat));
  }
  const auto outcomes = retrieve_batch(xs, helpers);
  for (std::size_t n = 0; n < xs.size(); ++n) {
    REQUIRE(outcomes[n].success());
    CHECK(*outcomes[n].secret == secrets[n]);
  }
}

TEST_CASE("serialization round trip and validation") {
  std::mt19937_64 rng(59);
  const SkeParams params = small_params();
  const auto x = random_vector(params.d, rng);
  const auto secret = random_secret(7, rng);
  const auto helper = enroll(x, secret, params, kNonceN, kNonceNhat);

  const auto bytes = serialize_helper(helper);
  CHECK(deserialize_helper(bytes) == helper);

  // layout spot checks: magic, version, big-endian m at offset 10
  CHECK(bytes[0] == 'S');
  CHECK(bytes[3] == '1');
  CHECK(bytes[4] == 0);
  CHECK(bytes[5] == 1);
  CHECK((std::uint32_t(bytes[10]) << 24 | std::uint32_t(bytes[11]) << 16 |
         std::uint32_t(bytes[12]) << 8 | bytes[13]) == params.m);
  CHECK(bytes.size() == 52 + params.m * (1 + 16));

  SUBCASE("truncation") {
    auto cut = bytes;
    cut.resize(cut.size() - 1);
    CHECK_THROWS_AS(deserialize_helper(cut), MalformedContainerError);
    cut.resize(3);
    CHECK_THROWS_AS(deserialize_helper(cut), MalformedContainerError);
  }
  SUBCASE("trailing garbage") {
    auto padded = bytes;
    padded.push_back(0);
    CHECK_THROWS_AS(deserialize_helper(padded), MalformedContainerError);
  }
  SUBCASE("bad magic") {
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(deserialize_helper(bad), MalformedContainerError);
  }
  SUBCASE("unsupported version") {
    auto bad = bytes;
    bad[5] = 9;
    CHECK_THROWS_AS(deserialize_helper(bad), VersionUnsupportedError);
  }
  SUBCASE("invalid parameters") {
    auto bad = bytes;
    bad[16] = 0xff;  // k > m
    bad[17] = 0xff;
    CHECK_THROWS_AS(deserialize_helper(bad), InvariantViolationError);
  }
  SUBCASE("equal nonces") {
    auto bad = bytes;
    std::copy(bad.begin() + 20, bad.begin() + 36, bad.begin() + 36);
    CHECK_THROWS_AS(deserialize_helper(bad), InvariantViolationError);
  }
}

TEST_CASE("sketch width is enforced for narrow fields") {
  SkeParams params;
  params.d = 4;
  params.m = 4;
  params.p = 5;  // 3-bit sketch values
  params.k = 2;
  params.ell_bits = 128;

  std::mt19937_64 rng(61);
  const auto x = random_vector(params.d, rng);
  auto helper = enroll(x, {}, params, kNonceN, kNonceNhat);
  for (auto v : helper.sketch) CHECK(v < 8);

  helper.sketch[0] = 9;  // exceeds 3 bits
  CHECK_THROWS_AS(serialize_helper(helper), InvariantViolationError);
}

TEST_CASE("tampering one sketch byte is caught by the tag at that index") {
  std::mt19937_64 rng(67);
  SkeParams params = small_params();
  params.m = 16;
  params.k = 3;

  // locate a trial whose phi indices are pairwise distinct, so the tamper
  // removes exactly one unlocking pair
  for (int trial = 0;; ++trial) {
    REQUIRE(trial < 200);
    const auto x = random_vector(params.d, rng);
    const auto secret = random_secret(2, rng);
    const auto helper =
        enroll(x, secret, params, kNonceN.derive(trial), kNonceNhat);
    const auto phi =
        rsv::iom_hash(x, params.m, params.p, helper.nonce_n);
    std::set<std::uint32_t> unique_x(phi.entries.begin(), phi.entries.end());
    if (unique_x.size() != params.m) continue;

    const auto baseline = retrieve(x, helper);
    REQUIRE(baseline.success());
    CHECK(baseline.matched == params.m);
    CHECK(baseline.unique_pairs == params.m);

    auto bytes = serialize_helper(helper);
    const std::size_t ss_offset = 52 + 8;  // fixed header, then 8 sketch bytes in
    bytes[ss_offset] ^= 0x55;
    const auto tampered = deserialize_helper(bytes);  // container still valid
    const auto outcome = retrieve(x, tampered);
    CHECK(outcome.matched == params.m - 1);
    CHECK(outcome.unique_pairs == params.m - 1);
    REQUIRE(outcome.success());  // still >= k pairs
    CHECK(*outcome.secret == secret);
    break;
  }
}
