#include "ske/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace ske::analysis {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.6931471805599453;

double log_binom_pmf(std::uint64_t m, double log_p, double log_q,
                     std::uint64_t j) {
  const double log_coeff = std::lgamma(double(m) + 1.0) -
                           std::lgamma(double(j) + 1.0) -
                           std::lgamma(double(m - j) + 1.0);
  double term = log_coeff;
  if (j > 0) term += double(j) * log_p;
  if (j < m) term += double(m - j) * log_q;
  return term;
}

}  // namespace

namespace {

// ln P(t < k): the lower tail computed directly, so values like e^-440
// keep full log-domain precision instead of drowning in 1 - (1 - eps).
double binom_log_below(std::uint64_t m, double prob, std::uint64_t k) {
  if (!(prob >= 0.0 && prob <= 1.0)) {
    throw DomainError("binomial probability must lie in [0,1]");
  }
  if (k > m + 1) {
    throw DomainError("tail index k must satisfy 0 <= k <= m+1");
  }
  if (k == 0) return -kInf;
  if (k == m + 1) return 0.0;
  if (prob == 0.0) return 0.0;  // k >= 1 here
  if (prob == 1.0) return -kInf;

  const double log_p = std::log(prob);
  const double log_q = std::log1p(-prob);
  double max_term = -kInf;
  for (std::uint64_t j = 0; j < k; ++j) {
    max_term = std::max(max_term, log_binom_pmf(m, log_p, log_q, j));
  }
  double sum = 0.0;
  for (std::uint64_t j = 0; j < k; ++j) {
    sum += std::exp(log_binom_pmf(m, log_p, log_q, j) - max_term);
  }
  return std::min(max_term + std::log(sum), 0.0);
}

}  // namespace

double binom_log_sf(std::uint64_t m, double prob, std::uint64_t k) {
  if (!(prob >= 0.0 && prob <= 1.0)) {
    throw DomainError("binomial probability must lie in [0,1]");
  }
  if (k > m + 1) {
    throw DomainError("tail index k must satisfy 0 <= k <= m+1");
  }
  if (k == 0) return 0.0;
  if (k == m + 1) return -kInf;
  if (prob == 0.0) return -kInf;           // k >= 1 here
  if (prob == 1.0) return 0.0;             // k <= m here

  const double log_p = std::log(prob);
  const double log_q = std::log1p(-prob);

  // Log-sum-exp over the tail, largest term first.
  double max_term = -kInf;
  for (std::uint64_t j = k; j <= m; ++j) {
    max_term = std::max(max_term, log_binom_pmf(m, log_p, log_q, j));
  }
  double sum = 0.0;
  for (std::uint64_t j = k; j <= m; ++j) {
    sum += std::exp(log_binom_pmf(m, log_p, log_q, j) - max_term);
  }
  const double result = max_term + std::log(sum);
  return std::min(result, 0.0);  // guard rounding above ln(1)
}

void ResilienceModel::validate() const {
  if (!(P >= 0.0 && P <= 1.0)) {
    throw DomainError("collision probability P must lie in [0,1]");
  }
  if (k < 1 || k > m) throw DomainError("need 1 <= k <= m");
}

double resilience_prob(const ResilienceModel& model) {
  model.validate();
  return std::exp(binom_log_sf(model.m, model.P * model.P, model.k));
}

double resilience_prob(std::uint64_t m, double P, std::uint64_t k) {
  return resilience_prob(ResilienceModel{m, k, P});
}

double brute_force_bits(std::uint32_t p, std::uint32_t k) {
  if (p < 2 || k < 1) throw DomainError("need p >= 2 and k >= 1");
  return double(k) * std::log2(double(p));
}

double fa_bits(std::uint64_t m, std::uint64_t k, double p_max) {
  if (!(p_max >= 0.0 && p_max <= 1.0)) {
    throw DomainError("p_max must lie in [0,1]");
  }
  return -binom_log_sf(m, p_max * p_max, k) / kLn2;
}

AdvResult adv_ske_ind(std::uint64_t m, std::uint64_t k, double p_max,
                      double p_genuine, double q) {
  if (q < 2.0) throw DomainError("tag count q must be >= 2");
  if (!(p_max >= 0.0 && p_max <= 1.0) ||
      !(p_genuine >= 0.0 && p_genuine <= 1.0)) {
    throw DomainError("probabilities must lie in [0,1]");
  }

  const double lsf_imp = binom_log_sf(m, p_max * p_max, k);

  AdvResult r;
  r.log_fap = std::log(q - 1.0) + lsf_imp;
  r.fap = (q - 1.0) * std::exp(lsf_imp);

  // FRP = P(t < k) for the genuine stream, carried in log domain.
  r.log_frp_exact = binom_log_below(m, p_genuine * p_genuine, k);
  r.frp_exact = std::exp(r.log_frp_exact);

  // The paper-compatible path round-trips the survival through one double
  // subtraction, so sub-ulp tails collapse onto the 2^-53 floor exactly as
  // printed tables do.
  r.frp = 1.0 - (1.0 - r.frp_exact);
  if (r.frp == 0.0 && r.log_frp_exact > -kInf) {
    r.frp = std::ldexp(1.0, -53);
  }

  r.adv = std::abs(r.fap - r.frp) / (q - 1.0);
  r.adv_bits = r.adv > 0.0 ? -std::log2(r.adv) : kInf;
  r.adv_exact = std::abs(r.fap - r.frp_exact) / (q - 1.0);
  r.adv_bits_exact = r.adv_exact > 0.0 ? -std::log2(r.adv_exact) : kInf;
  return r;
}

void ScoreSet::validate() const {
  if (genuine.empty() || imposter.empty()) {
    throw EmptyScoresError("both genuine and imposter scores are required");
  }
  for (double s : genuine) {
    if (!(s >= 0.0 && s <= 1.0)) throw DomainError("scores must lie in [0,1]");
  }
  for (double s : imposter) {
    if (!(s >= 0.0 && s <= 1.0)) throw DomainError("scores must lie in [0,1]");
  }
}

RateTable compute_rates(const ScoreSet& scores) {
  scores.validate();
  std::vector<double> genuine(scores.genuine);
  std::vector<double> imposter(scores.imposter);
  std::sort(genuine.begin(), genuine.end());
  std::sort(imposter.begin(), imposter.end());

  std::vector<double> thresholds;
  thresholds.reserve(genuine.size() + imposter.size() + 2);
  thresholds.push_back(0.0);
  thresholds.insert(thresholds.end(), genuine.begin(), genuine.end());
  thresholds.insert(thresholds.end(), imposter.begin(), imposter.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());
  // Sentinel above every score: FAR = 0 is always reachable.
  thresholds.push_back(std::nextafter(thresholds.back(), 2.0));

  RateTable table;
  table.thresholds = thresholds;
  table.far.reserve(thresholds.size());
  table.frr.reserve(thresholds.size());
  for (double tau : thresholds) {
    const auto imp_it =
        std::lower_bound(imposter.begin(), imposter.end(), tau);
    const auto gen_it = std::lower_bound(genuine.begin(), genuine.end(), tau);
    table.far.push_back(double(imposter.end() - imp_it) /
                        double(imposter.size()));
    table.frr.push_back(double(gen_it - genuine.begin()) /
                        double(genuine.size()));
  }

  // FAR decreases with tau, FRR increases: find the sign change of
  // (FAR - FRR) and interpolate linearly between the bracketing points.
  table.eer = 0.0;
  table.eer_threshold = thresholds.front();
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const double diff = table.far[i] - table.frr[i];
    if (diff <= 0.0) {
      if (diff == 0.0 || i == 0) {
        table.eer = (table.far[i] + table.frr[i]) / 2.0;
        table.eer_threshold = thresholds[i];
      } else {
        const double d0 = table.far[i - 1] - table.frr[i - 1];
        const double w = d0 / (d0 - diff);  // d0 > 0 >= diff
        table.eer = (1.0 - w) * (table.far[i - 1] + table.frr[i - 1]) / 2.0 +
                    w * (table.far[i] + table.frr[i]) / 2.0;
        table.eer_threshold =
            (1.0 - w) * thresholds[i - 1] + w * thresholds[i];
      }
      break;
    }
  }

  table.frr_at_zero_far = 1.0;
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (table.far[i] == 0.0) {
      table.frr_at_zero_far = std::min(table.frr_at_zero_far, table.frr[i]);
    }
  }
  return table;
}

LinkabilityResult linkability(const std::vector<double>& mated,
                              const std::vector<double>& nonmated,
                              double omega, std::uint32_t n_bins) {
  if (mated.empty() || nonmated.empty()) {
    throw EmptyScoresError("both mated and nonmated scores are required");
  }
  if (!(omega >= 0.0 && omega <= 1.0)) {
    throw DomainError("omega must lie in [0,1]");
  }
  if (n_bins < 2) throw DomainError("need at least 2 bins");

  auto bin_of = [n_bins](double s) -> std::uint32_t {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw DomainError("scores must lie in [0,1]");
    }
    const auto b = std::uint32_t(s * n_bins);
    return std::min(b, n_bins - 1);
  };

  LinkabilityResult r;
  r.bin_centers.resize(n_bins);
  r.mated_density.assign(n_bins, 0.0);
  r.nonmated_density.assign(n_bins, 0.0);
  r.d_curve.assign(n_bins, 0.0);
  for (std::uint32_t b = 0; b < n_bins; ++b) {
    r.bin_centers[b] = (b + 0.5) / n_bins;
  }
  for (double s : mated) r.mated_density[bin_of(s)] += 1.0 / mated.size();
  for (double s : nonmated) {
    r.nonmated_density[bin_of(s)] += 1.0 / nonmated.size();
  }

  for (std::uint32_t b = 0; b < n_bins; ++b) {
    const double pm = r.mated_density[b];
    const double pnm = r.nonmated_density[b];
    double d = 0.0;
    if (pm > 0.0 && pnm == 0.0) {
      d = omega > 0.0 ? 1.0 : 0.0;  // LR -> infinity
    } else if (pm > 0.0 || pnm > 0.0) {
      const double lr = pm / pnm;  // pnm > 0 here
      d = 2.0 * (lr * omega) / (1.0 + lr * omega) - 1.0;
    }
    r.d_curve[b] = std::max(0.0, d);
    r.d_sys += pm * r.d_curve[b];
  }
  r.d_sys = std::clamp(r.d_sys, 0.0, 1.0);
  return r;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) {
    throw EmptyScoresError("KS distance needs nonempty samples");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double ks = 0.0;
  std::size_t ia = 0, ib = 0;
  while (ia < a.size() && ib < b.size()) {
    const double v = std::min(a[ia], b[ib]);
    while (ia < a.size() && a[ia] <= v) ++ia;
    while (ib < b.size() && b[ib] <= v) ++ib;
    ks = std::max(ks, std::abs(double(ia) / a.size() - double(ib) / b.size()));
  }
  return ks;
}

std::vector<VarianceRow> variance_vs_m(double P,
                                       const std::vector<std::uint64_t>& m_list,
                                       std::uint32_t trials,
                                       std::uint64_t seed) {
  if (m_list.empty()) throw DomainError("m_list must be nonempty");
  if (!(P >= 0.0 && P <= 1.0)) throw DomainError("P must lie in [0,1]");
  if (trials < 2) throw DomainError("need at least 2 trials");

  std::vector<VarianceRow> rows;
  rows.reserve(m_list.size());
  std::mt19937_64 rng(seed);
  for (std::uint64_t m : m_list) {
    std::binomial_distribution<std::uint64_t> dist(m, P * P);
    double sum = 0.0, sum_sq = 0.0;
    for (std::uint32_t t = 0; t < trials; ++t) {
      const double frac = double(dist(rng)) / double(m);
      sum += frac;
      sum_sq += frac * frac;
    }
    const double mean = sum / trials;
    const double var =
        std::max(0.0, (sum_sq - trials * mean * mean) / (trials - 1.0));
    rows.push_back({m, mean, std::sqrt(var)});
  }
  return rows;
}

SecurityReport build_security_report(std::uint64_t m, std::uint64_t k,
                                     std::uint32_t p, double p_max,
                                     double p_genuine,
                                     const std::vector<double>& q_values) {
  SecurityReport report;
  report.m = m;
  report.k = k;
  report.p = p;
  report.p_max = p_max;
  report.p_genuine = p_genuine;
  report.q_values = q_values;
  report.bf_bits = brute_force_bits(p, std::uint32_t(k));
  report.log_fa_prob = binom_log_sf(m, p_max * p_max, k);
  report.fa_bits = -report.log_fa_prob / kLn2;
  report.resilience = resilience_prob(m, p_genuine, k);
  for (double q : q_values) {
    report.adv.push_back(adv_ske_ind(m, k, p_max, p_genuine, q));
  }
  report.notes.push_back(
      "fa_bits is monotone decreasing in p_max at fixed (m, k); tabulated "
      "pairings that violate this ordering indicate transposed inputs");
  report.notes.push_back(
      "frp is the double-precision value (floored at 2^-53 when the genuine "
      "survival rounds to 1); log_frp_exact carries the log-domain tail");
  return report;
}

}  // namespace ske::analysis
