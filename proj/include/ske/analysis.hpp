#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ske/errors.hpp"

namespace ske::analysis {

// ln P(t >= k) for t ~ Bin(m, prob), computed by log-sum-exp over
// log-gamma pmf terms so tails far below double range stay meaningful in
// log form. Boundaries are exact: k = 0 gives 0 (= ln 1), k = m+1 gives
// -infinity.
double binom_log_sf(std::uint64_t m, double prob, std::uint64_t k);

struct ResilienceModel {
  std::uint64_t m = 0;
  std::uint64_t k = 0;  // delta = k / m
  double P = 0.0;       // per-index collision probability per stream

  void validate() const;
};

// Success probability of retrieval under the random error model:
// exp(ln P(t >= k)) with t ~ Bin(m, P^2).
double resilience_prob(const ResilienceModel& model);
double resilience_prob(std::uint64_t m, double P, std::uint64_t k);

// k * log2(p): cost of guessing all polynomial coefficients.
double brute_force_bits(std::uint32_t p, std::uint32_t k);

// -log2 P(t >= k) with t ~ Bin(m, p_max^2): false-accept attack
// complexity. Monotone nonincreasing in p_max, nondecreasing in k.
double fa_bits(std::uint64_t m, std::uint64_t k, double p_max);

struct AdvResult {
  double fap = 0.0;        // (q-1) * per-attempt false-accept probability
  double log_fap = 0.0;    // natural log of fap
  double frp = 0.0;        // paper-compatible double-precision FRP
  double frp_exact = 0.0;  // -expm1(log survival); may underflow
  double log_frp_exact = 0.0;
  double adv = 0.0;        // |fap - frp| / (q-1), paper-compatible path
  double adv_bits = 0.0;   // -log2(adv)
  double adv_exact = 0.0;
  double adv_bits_exact = 0.0;
};

// Lemma-style q-tag indistinguishability advantage. The genuine survival
// probability saturates to 1 in double precision for realistic
// parameters; the paper-compatible FRP keeps the one-ulp floor 2^-53 in
// that case so printed figures stay reproducible, while frp_exact /
// log_frp_exact carry the log-domain value.
AdvResult adv_ske_ind(std::uint64_t m, std::uint64_t k, double p_max,
                      double p_genuine, double q);

struct ScoreSet {
  std::vector<double> genuine;
  std::vector<double> imposter;

  // EmptyScoresError if either side is empty; DomainError outside [0,1].
  void validate() const;
};

struct RateTable {
  std::vector<double> thresholds;
  std::vector<double> far;  // fraction of imposter scores >= threshold
  std::vector<double> frr;  // fraction of genuine scores < threshold
  double eer = 0.0;
  double eer_threshold = 0.0;
  double frr_at_zero_far = 0.0;
};

// Sweeps thresholds over the observed score values; EER by linear
// interpolation between the bracketing thresholds.
RateTable compute_rates(const ScoreSet& scores);

struct LinkabilityResult {
  std::vector<double> bin_centers;
  std::vector<double> mated_density;     // histogram mass per bin
  std::vector<double> nonmated_density;  // histogram mass per bin
  std::vector<double> d_curve;           // local measure, clamped to [0,1]
  double d_sys = 0.0;
};

// Local measure 2*LR*omega/(1 + LR*omega) - 1 per shared [0,1] bin,
// clamped below at 0; empty-vs-empty bins contribute 0. d_sys is the
// mated-mass weighted sum.
LinkabilityResult linkability(const std::vector<double>& mated,
                              const std::vector<double>& nonmated,
                              double omega, std::uint32_t n_bins);

// Two-sample Kolmogorov-Smirnov distance (max ECDF gap).
double ks_distance(std::vector<double> a, std::vector<double> b);

struct VarianceRow {
  std::uint64_t m = 0;
  double mean = 0.0;  // mean of t/m
  double stddev = 0.0;
};

// Monte-Carlo spread of the normalized collision count t/m with
// t ~ Bin(m, P^2): the mean stays near P^2 while the spread shrinks
// like 1/sqrt(m).
std::vector<VarianceRow> variance_vs_m(double P,
                                       const std::vector<std::uint64_t>& m_list,
                                       std::uint32_t trials,
                                       std::uint64_t seed);

struct SecurityReport {
  // echoed inputs
  std::uint64_t m = 0;
  std::uint64_t k = 0;
  std::uint32_t p = 0;
  double p_max = 0.0;
  double p_genuine = 0.0;
  std::vector<double> q_values;

  double bf_bits = 0.0;
  double fa_bits = 0.0;
  double log_fa_prob = 0.0;  // natural log of the per-attempt tail
  double resilience = 0.0;   // exp(ln P(t >= k)) at P = p_genuine
  std::vector<AdvResult> adv;  // one row per q
  std::vector<std::string> notes;
};

// Bundles the closed-form security quantities for one parameter point.
// The notes always record that fa_bits is monotone decreasing in p_max,
// so transposed pairings in external tables are detectable.
SecurityReport build_security_report(std::uint64_t m, std::uint64_t k,
                                     std::uint32_t p, double p_max,
                                     double p_genuine,
                                     const std::vector<double>& q_values);

}  // namespace ske::analysis
