#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "ske/analysis.hpp"

using namespace ske;
namespace an = ske::analysis;

namespace {

// Exhaustive oracle: walk all 2^m outcomes and accumulate the exact tail
// mass. Only viable for small m, which is the point.
double enumerate_sf(unsigned m, double prob, unsigned k) {
  double tail = 0.0;
  for (std::uint32_t outcome = 0; outcome < (1u << m); ++outcome) {
    const unsigned successes = unsigned(__builtin_popcount(outcome));
    if (successes < k) continue;
    tail += std::pow(prob, successes) * std::pow(1.0 - prob, m - successes);
  }
  return tail;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("binomial log survival boundaries") {
  CHECK(an::binom_log_sf(10, 0.5, 0) == 0.0);
  CHECK(an::binom_log_sf(10, 0.5, 11) ==
        -std::numeric_limits<double>::infinity());
  CHECK(an::binom_log_sf(10, 0.0, 1) ==
        -std::numeric_limits<double>::infinity());
  CHECK(an::binom_log_sf(10, 1.0, 10) == 0.0);
  CHECK_THROWS_AS(an::binom_log_sf(10, 1.5, 3), DomainError);
  CHECK_THROWS_AS(an::binom_log_sf(10, 0.5, 12), DomainError);
}

TEST_CASE("binomial log survival matches hand-computed values") {
  // P(t >= 2), t ~ Bin(4, 1/2): 11/16 by enumeration of the 16 outcomes
  CHECK(an::binom_log_sf(4, 0.5, 2) ==
        doctest::Approx(std::log(11.0 / 16.0)).epsilon(1e-12));
}

TEST_CASE("binomial log survival matches exhaustive enumeration") {
  for (unsigned m = 1; m <= 12; ++m) {
    for (unsigned k = 0; k <= m + 1; ++k) {
      for (int pi = 1; pi <= 9; ++pi) {
        const double prob = pi / 10.0;
        const double exact = enumerate_sf(m, prob, k);
        const double computed = std::exp(an::binom_log_sf(m, prob, k));
        CHECK(std::abs(computed - exact) < 1e-12);
      }
    }
  }
}

TEST_CASE("deep tails stay accurate in log form") {
  // P(t >= 54), t ~ Bin(1024, 0.1006^2) ~ 4.53e-22
  const double lsf = an::binom_log_sf(1024, 0.1006 * 0.1006, 54);
  CHECK(std::exp(lsf) == doctest::Approx(4.53e-22).epsilon(0.05));

  // far below double range: the log value is still finite and sane
  const double deep = an::binom_log_sf(1024, 1e-6, 512);
  CHECK(deep < -700.0);
  CHECK(std::isfinite(deep));
}

TEST_CASE("resilience of the worked configuration") {
  const double p = an::resilience_prob(256, 0.9, 193);
  CHECK(p == doctest::Approx(0.989).epsilon(0.004));

  // Gaussian-approximation oracle: z = (193 - 207.36)/6.276
  const double mean = 256 * 0.81;
  const double sigma = std::sqrt(256 * 0.81 * 0.19);
  const double approx = normal_cdf(-(193.0 - mean) / sigma);
  CHECK(p == doctest::Approx(approx).epsilon(0.004));

  CHECK(an::resilience_prob(256, 1.0, 256) == 1.0);
  CHECK_THROWS_AS(an::resilience_prob(256, 1.5, 10), DomainError);
  CHECK_THROWS_AS(an::resilience_prob(256, 0.5, 0), DomainError);
}

TEST_CASE("survival and lower tail sum to one in the linear domain") {
  const std::uint64_t m = 100;
  const double prob = 0.37;
  for (std::uint64_t k : {1ull, 17ull, 50ull, 99ull}) {
    const double upper = std::exp(an::binom_log_sf(m, prob, k));
    double lower = 0.0;
    for (std::uint64_t j = 0; j < k; ++j) {
      lower += std::exp(std::lgamma(double(m + 1)) -
                        std::lgamma(double(j + 1)) -
                        std::lgamma(double(m - j + 1)) +
                        j * std::log(prob) + (m - j) * std::log1p(-prob));
    }
    CHECK(upper + lower == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("brute force bits") {
  CHECK(an::brute_force_bits(256, 20) == 160.0);
  CHECK(an::brute_force_bits(251, 54) ==
        doctest::Approx(430.4633519133417).epsilon(1e-12));
  CHECK(an::brute_force_bits(251, 54) >= 256.0);
  CHECK(an::brute_force_bits(2, 1) == 1.0);
  CHECK_THROWS_AS(an::brute_force_bits(1, 5), DomainError);
}

TEST_CASE("false-accept bits reproduce the reference parameter points") {
  CHECK(an::fa_bits(1024, 54, 0.1006) == doctest::Approx(70.901).epsilon(1e-4));
  CHECK(an::fa_bits(1024, 54, 0.1279) == doctest::Approx(42.128).epsilon(1e-4));
  CHECK(an::fa_bits(1024, 54, 0.1846) == doctest::Approx(9.545).epsilon(1e-3));
  CHECK(an::fa_bits(1024, 54, 0.2047) == doctest::Approx(4.236).epsilon(1e-3));
  CHECK(an::fa_bits(1024, 0, 0.3) == 0.0);
}

TEST_CASE("fa_bits is monotone in p_max and k") {
  double prev = std::numeric_limits<double>::infinity();
  for (double p_max = 0.05; p_max < 0.96; p_max += 0.05) {
    const double bits = an::fa_bits(1024, 54, p_max);
    CHECK(bits <= prev);
    prev = bits;
  }
  prev = 0.0;
  for (std::uint64_t k = 1; k <= 128; k += 9) {
    const double bits = an::fa_bits(1024, k, 0.25);
    CHECK(bits >= prev);
    prev = bits;
  }
}

TEST_CASE("tag indistinguishability advantage") {
  const auto r = an::adv_ske_ind(1024, 54, 0.1006, 0.5944, 1024.0);
  CHECK(r.frp == doctest::Approx(1.1102230246251565e-16).epsilon(1e-9));
  CHECK(r.fap == doctest::Approx(1023 * 4.535e-22).epsilon(0.05));
  CHECK(r.adv == doctest::Approx(1.081e-19).epsilon(0.01));
  CHECK(r.adv_bits == doctest::Approx(63.0).epsilon(0.001));
  // the log-domain FRP is a genuine tail, far below the double floor
  CHECK(r.log_frp_exact == doctest::Approx(-272.6185445).epsilon(1e-8));
  CHECK(r.frp_exact == doctest::Approx(4.011e-119).epsilon(0.001));

  // q sweep: plateau at the per-attempt fa complexity
  const std::vector<double> qs{64, 1024, 1048576, 1073741824.0,
                               1099511627776.0, 1125899906842624.0};
  const std::vector<double> expected{58.98, 63.00, 71.28, 70.90, 70.90, 70.90};
  const double fa = an::fa_bits(1024, 54, 0.1006);
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const auto row = an::adv_ske_ind(1024, 54, 0.1006, 0.5944, qs[i]);
    CHECK(row.adv_bits == doctest::Approx(expected[i]).epsilon(0.001));
    if (i >= 3) CHECK(std::abs(row.adv_bits - fa) < 0.1);
  }

  CHECK_THROWS_AS(an::adv_ske_ind(10, 2, 0.5, 0.9, 1.0), DomainError);
}

TEST_CASE("advantage with equal probabilities degrades to the fa path") {
  const auto r = an::adv_ske_ind(128, 16, 0.4, 0.4, 1e9);
  // FRP dominated, FAP/(q-1) is the per-attempt tail
  const double per_attempt = std::exp(an::binom_log_sf(128, 0.16, 16));
  CHECK(r.fap / (1e9 - 1.0) == doctest::Approx(per_attempt).epsilon(1e-9));
}

TEST_CASE("rate table on crafted score sets") {
  SUBCASE("perfect separation") {
    an::ScoreSet scores{{0.8, 0.9, 0.95}, {0.1, 0.2, 0.3}};
    const auto table = an::compute_rates(scores);
    CHECK(table.eer == 0.0);
    CHECK(table.frr_at_zero_far == 0.0);
  }
  SUBCASE("identical distributions") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    an::ScoreSet scores;
    for (int i = 0; i < 4000; ++i) {
      scores.genuine.push_back(u(rng));
      scores.imposter.push_back(u(rng));
    }
    const auto table = an::compute_rates(scores);
    CHECK(table.eer == doctest::Approx(0.5).epsilon(0.05));
  }
  SUBCASE("binomial sampling oracle") {
    std::mt19937_64 rng(5);
    std::binomial_distribution<int> gen(100, 0.81), imp(100, 0.01);
    an::ScoreSet scores;
    for (int i = 0; i < 1000; ++i) {
      scores.genuine.push_back(gen(rng) / 100.0);
      scores.imposter.push_back(imp(rng) / 100.0);
    }
    const auto table = an::compute_rates(scores);
    CHECK(table.eer < 0.001);
  }
  SUBCASE("empty inputs are rejected") {
    CHECK_THROWS_AS(an::compute_rates({{}, {0.5}}), EmptyScoresError);
    CHECK_THROWS_AS(an::compute_rates({{0.5}, {}}), EmptyScoresError);
    CHECK_THROWS_AS(an::compute_rates({{1.5}, {0.5}}), DomainError);
  }
}

TEST_CASE("EER matches a dense threshold sweep") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gen(0.7, 0.1), imp(0.3, 0.1);
  for (int round = 0; round < 10; ++round) {
    an::ScoreSet scores;
    for (int i = 0; i < 500; ++i) {
      scores.genuine.push_back(std::clamp(gen(rng), 0.0, 1.0));
      scores.imposter.push_back(std::clamp(imp(rng), 0.0, 1.0));
    }
    const auto table = an::compute_rates(scores);

    // brute-force sweep at 10x the threshold resolution
    double best_gap = 1e9, brute_eer = 0.0;
    for (int step = 0; step <= 10000; ++step) {
      const double tau = step / 10000.0;
      double far = 0, frr = 0;
      for (double s : scores.imposter) far += s >= tau;
      for (double s : scores.genuine) frr += s < tau;
      far /= scores.imposter.size();
      frr /= scores.genuine.size();
      if (std::abs(far - frr) < best_gap) {
        best_gap = std::abs(far - frr);
        brute_eer = (far + frr) / 2.0;
      }
    }
    CHECK(std::abs(table.eer - brute_eer) < 0.001);
  }
}

TEST_CASE("linkability measure") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  SUBCASE("same distribution is unlinkable") {
    std::vector<double> mated, nonmated;
    for (int i = 0; i < 5000; ++i) {
      mated.push_back(u(rng));
      nonmated.push_back(u(rng));
    }
    const auto r = an::linkability(mated, nonmated, 1.0, 50);
    CHECK(r.d_sys < 0.05);
  }
  SUBCASE("disjoint supports are fully linkable") {
    std::vector<double> mated, nonmated;
    for (int i = 0; i < 2000; ++i) {
      mated.push_back(0.75 + 0.25 * u(rng));
      nonmated.push_back(0.25 * u(rng));
    }
    const auto r = an::linkability(mated, nonmated, 1.0, 50);
    CHECK(r.d_sys > 0.95);
    CHECK(r.d_sys <= 1.0);
  }
  SUBCASE("curve values stay in [0,1] after clamping") {
    std::vector<double> mated, nonmated;
    for (int i = 0; i < 3000; ++i) {
      mated.push_back(std::clamp(0.5 + 0.2 * (u(rng) - 0.5), 0.0, 1.0));
      nonmated.push_back(u(rng));
    }
    const auto r = an::linkability(mated, nonmated, 1.0, 50);
    for (double d : r.d_curve) {
      CHECK(d >= 0.0);
      CHECK(d <= 1.0);
    }
    CHECK(r.d_sys >= 0.0);
    CHECK(r.d_sys <= 1.0);
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(an::linkability({}, {0.5}, 1.0, 50), EmptyScoresError);
    CHECK_THROWS_AS(an::linkability({0.5}, {0.5}, 2.0, 50), DomainError);
    CHECK_THROWS_AS(an::linkability({0.5}, {0.5}, 1.0, 1), DomainError);
  }
}

TEST_CASE("ks distance") {
  CHECK(an::ks_distance({0.1, 0.2, 0.3}, {0.1, 0.2, 0.3}) == 0.0);
  CHECK(an::ks_distance({0.1, 0.2}, {0.8, 0.9}) == 1.0);
  // ECDFs of {0,1} vs {0,1,1}: max gap 1/6 at value 0
  CHECK(an::ks_distance({0.0, 1.0}, {0.0, 1.0, 1.0}) ==
        doctest::Approx(1.0 / 6.0));
  CHECK_THROWS_AS(an::ks_distance({}, {0.5}), EmptyScoresError);
}

TEST_CASE("spread of t/m shrinks like 1/sqrt(m)") {
  const auto rows = an::variance_vs_m(0.9, {256, 512, 1024}, 20000, 99);
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) {
    CHECK(row.mean == doctest::Approx(0.81).epsilon(0.01));
    const double predicted = std::sqrt(0.81 * 0.19 / double(row.m));
    CHECK(row.stddev == doctest::Approx(predicted).epsilon(0.05));
  }
  CHECK(rows[0].stddev / rows[1].stddev ==
        doctest::Approx(std::sqrt(2.0)).epsilon(0.15));
  CHECK(rows[0].stddev / rows[2].stddev == doctest::Approx(2.0).epsilon(0.15));

  const auto certain = an::variance_vs_m(1.0, {64, 256}, 1000, 1);
  CHECK(certain[0].stddev == 0.0);
  CHECK(certain[1].stddev == 0.0);
  CHECK_THROWS_AS(an::variance_vs_m(0.5, {}, 100, 1), DomainError);
}

TEST_CASE("security report bundles the quantities and flags monotonicity") {
  const auto report = an::build_security_report(
      1024, 54, 251, 0.1006, 0.5944, {64, 1024, 1048576});
  CHECK(report.bf_bits == doctest::Approx(430.46).epsilon(1e-3));
  CHECK(report.fa_bits == doctest::Approx(70.901).epsilon(1e-4));
  CHECK(report.resilience == doctest::Approx(1.0).epsilon(1e-9));
  REQUIRE(report.adv.size() == 3);
  CHECK(report.adv[1].adv_bits == doctest::Approx(63.0).epsilon(0.001));
  REQUIRE(!report.notes.empty());
  bool has_monotone_note = false;
  for (const auto& note : report.notes) {
    if (note.find("monotone") != std::string::npos) has_monotone_note = true;
  }
  CHECK(has_monotone_note);
}
