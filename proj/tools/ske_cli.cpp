// Command-line front door: enrollment, retrieval, evaluation campaigns,
// security reports, and the template-protection experiments. Emits JSON to
// stdout and CSV/JSON artifacts under --out.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 retrieval
// shortfall, 4 data error (files, containers, malformed vectors).

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ske/analysis.hpp"
#include "ske/dataset.hpp"
#include "ske/rsv.hpp"
#include "ske/ske.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using ske::rsv::Nonce;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitRetrievalFailure = 3;
constexpr int kExitDataError = 4;

struct Options {
  std::vector<std::uint32_t> params;  // d,m,p,k,ell
  std::uint64_t seed = 1;
  std::string secret_hex;
  std::string vectors_path;
  std::string helper_path;
  std::string protocol = "full";
  std::uint32_t subjects = 100;
  std::uint32_t impressions = 8;
  double cos_mean = 0.9;
  double cos_std = 0.02;
  std::uint64_t trials = 0;  // 0 = no cap
  std::string out_dir;
  std::string score_mode = "retrieve";
  double p_max = -1.0;
  double p_genuine = -1.0;
  std::string eval_summary_path;
  std::vector<double> q_values;
  double omega = 1.0;
  std::uint32_t bins = 50;
  bool store_secret_hash = false;
};

ske::SkeParams parse_params(const Options& opt) {
  if (opt.params.size() != 5) {
    throw ske::DomainError("--params expects d,m,p,k,ell");
  }
  ske::SkeParams params;
  params.d = opt.params[0];
  params.m = opt.params[1];
  params.p = opt.params[2];
  params.k = opt.params[3];
  params.ell_bits = opt.params[4];
  params.validate();
  return params;
}

Nonce nonce_from_seed(std::uint64_t seed, std::uint64_t index) {
  return Nonce::from_words(seed, 0x534b455f4e4f4e43ULL).derive(index);
}

std::vector<std::uint8_t> parse_hex(const std::string& hex) {
  if (hex.size() % 2 != 0) {
    throw ske::DomainError("hex secret must have an even number of digits");
  }
  auto digit = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw ske::DomainError("invalid hex digit in secret");
  };
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::uint8_t(digit(hex[2 * i]) << 4 | digit(hex[2 * i + 1]));
  }
  return out;
}

std::string to_hex(const std::vector<std::uint8_t>& bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

// Largest whole-byte secret guaranteed below p^k.
std::size_t max_secret_bytes(const ske::SkeParams& params) {
  return std::size_t(params.k * std::log2(double(params.p)) / 8.0);
}

std::vector<std::uint8_t> generate_secret(const ske::SkeParams& params,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x5345435245543aULL);
  std::uniform_int_distribution<int> byte(0, 255);
  std::vector<std::uint8_t> secret(max_secret_bytes(params));
  for (auto& b : secret) b = std::uint8_t(byte(rng));
  return secret;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ske::ParseError("cannot open " + path, 0, 0);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

void write_file(const std::string& path,
                const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ske::Error("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            std::streamsize(bytes.size()));
  if (!out) throw ske::Error("write to " + path + " failed");
}

fs::path ensure_out_dir(const Options& opt) {
  if (opt.out_dir.empty()) {
    throw ske::DomainError("--out DIR is required for this command");
  }
  fs::path dir(opt.out_dir);
  fs::create_directories(dir);
  return dir;
}

void write_json(const fs::path& path, const json& value) {
  std::ofstream out(path);
  out << value.dump(2) << '\n';
}

void write_score_csv(const fs::path& path, const std::vector<double>& scores,
                     const std::vector<int>* successes,
                     const std::vector<std::uint32_t>* ts) {
  std::ofstream out(path);
  out << "score";
  if (successes) out << ",success";
  if (ts) out << ",t";
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < scores.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.12g", scores[i]);
    out << buf;
    if (successes) out << ',' << (*successes)[i];
    if (ts) out << ',' << (*ts)[i];
    out << '\n';
  }
}

json adv_to_json(double q, const ske::analysis::AdvResult& adv) {
  return json{{"q", q},
              {"fap", adv.fap},
              {"log_fap", adv.log_fap},
              {"frp", adv.frp},
              {"frp_exact", adv.frp_exact},
              {"log_frp_exact", adv.log_frp_exact},
              {"adv", adv.adv},
              {"adv_bits", adv.adv_bits},
              {"adv_exact", adv.adv_exact},
              {"adv_bits_exact", adv.adv_bits_exact}};
}

json report_to_json(const ske::analysis::SecurityReport& report) {
  json adv = json::array();
  for (std::size_t i = 0; i < report.adv.size(); ++i) {
    adv.push_back(adv_to_json(report.q_values[i], report.adv[i]));
  }
  json resilience_curve = json::array();
  for (int step = 0; step <= 20; ++step) {
    const double P = 0.5 + 0.025 * step;
    resilience_curve.push_back(
        {{"P", P},
         {"probability", ske::analysis::resilience_prob(report.m, P, report.k)}});
  }
  return json{{"m", report.m},
              {"k", report.k},
              {"p", report.p},
              {"p_max", report.p_max},
              {"p_genuine", report.p_genuine},
              {"bf_bits", report.bf_bits},
              {"fa_bits", report.fa_bits},
              {"log_fa_prob", report.log_fa_prob},
              {"resilience", report.resilience},
              {"resilience_curve", resilience_curve},
              {"adv", adv},
              {"notes", report.notes}};
}

std::vector<std::uint8_t> sha256_of(const std::vector<std::uint8_t>& data);

// --- enroll -------------------------------------------------------------

int cmd_enroll(const Options& opt) {
  const ske::SkeParams params = parse_params(opt);  // reject before compute
  if (opt.vectors_path.empty() || opt.helper_path.empty()) {
    throw ske::DomainError("enroll needs --vectors and --helper");
  }
  const auto vectors = ske::dataset::load_vectors(opt.vectors_path);
  if (vectors.empty()) {
    throw ske::ParseError("vector file is empty", 0, 0);
  }

  const bool generated = opt.secret_hex.empty();
  const auto secret = generated ? generate_secret(params, opt.seed)
                                : parse_hex(opt.secret_hex);

  const Nonce nonce_n = nonce_from_seed(opt.seed, 1);
  const Nonce nonce_nhat = nonce_from_seed(opt.seed, 2);
  const auto helper =
      ske::enroll(vectors.front(), secret, params, nonce_n, nonce_nhat);
  write_file(opt.helper_path, ske::serialize_helper(helper));

  const auto phi = ske::rsv::iom_hash(vectors.front(), params.m, params.p,
                                      helper.nonce_n);
  std::vector<std::uint32_t> sorted(phi.entries);
  std::sort(sorted.begin(), sorted.end());
  const auto unique_count =
      std::unique(sorted.begin(), sorted.end()) - sorted.begin();

  json out{{"unique_phi_count", unique_count},
           {"m", params.m},
           {"k", params.k},
           {"file", opt.helper_path}};
  if (generated) out["secret_hex"] = to_hex(secret);
  if (opt.store_secret_hash) {
    const auto hash = sha256_of(secret);
    const std::string hex = to_hex(hash);
    std::ofstream side(opt.helper_path + ".secret-hash");
    side << hex << '\n';
    out["secret_sha256"] = hex;
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

// --- retrieve -----------------------------------------------------------

int cmd_retrieve(const Options& opt) {
  if (opt.vectors_path.empty() || opt.helper_path.empty()) {
    throw ske::DomainError("retrieve needs --vectors and --helper");
  }
  const auto helper = ske::deserialize_helper(read_file(opt.helper_path));
  const auto vectors = ske::dataset::load_vectors(opt.vectors_path);
  if (vectors.empty()) {
    throw ske::ParseError("vector file is empty", 0, 0);
  }

  const auto outcome = ske::retrieve(vectors.front(), helper);
  json out{{"success", outcome.success()},
           {"t", outcome.unique_pairs},
           {"matched", outcome.matched},
           {"k", outcome.needed}};
  if (outcome.success()) out["secret_hex"] = to_hex(*outcome.secret);
  std::cout << out.dump(2) << '\n';
  return outcome.success() ? 0 : kExitRetrievalFailure;
}

// --- eval ---------------------------------------------------------------

struct AttemptResult {
  double score = 0.0;
  int success = 0;
  std::uint32_t t = 0;
  double seconds = 0.0;
};

ske::dataset::ProtocolPairs select_pairs(const ske::dataset::Population& pop,
                                         const Options& opt) {
  auto pairs = opt.protocol == "1vs1" ? ske::dataset::one_vs_one_protocol(pop)
                                      : ske::dataset::full_protocol(pop);
  if (opt.trials > 0) {
    std::mt19937_64 rng(opt.seed ^ 0x5041495253ULL);
    std::shuffle(pairs.genuine.begin(), pairs.genuine.end(), rng);
    std::shuffle(pairs.imposter.begin(), pairs.imposter.end(), rng);
    if (pairs.genuine.size() > opt.trials) pairs.genuine.resize(opt.trials);
    if (pairs.imposter.size() > opt.trials) pairs.imposter.resize(opt.trials);
  }
  return pairs;
}

int cmd_eval(const Options& opt) {
  const ske::SkeParams params = parse_params(opt);
  if (opt.protocol != "full" && opt.protocol != "1vs1") {
    throw ske::DomainError("--protocol must be full or 1vs1");
  }
  if (opt.score_mode != "retrieve" && opt.score_mode != "rv") {
    throw ske::DomainError("--score-mode must be retrieve or rv");
  }
  const fs::path out_dir = ensure_out_dir(opt);

  const auto pop = ske::dataset::gen_population(
      opt.subjects, opt.impressions, params.d, opt.cos_mean, opt.cos_std,
      opt.seed);
  const auto pairs = select_pairs(pop, opt);

  write_json(out_dir / "population.json", json{{"subjects", pop.subjects},
                                               {"impressions", pop.impressions},
                                               {"d", pop.dim},
                                               {"seed", pop.seed},
                                               {"cos_mean", pop.cos_mean},
                                               {"cos_std", pop.cos_std}});

  json summary{{"protocol", opt.protocol},
               {"score_mode", opt.score_mode},
               {"genuine_attempts", pairs.genuine.size()},
               {"imposter_attempts", pairs.imposter.size()},
               {"m", params.m},
               {"p", params.p},
               {"k", params.k},
               {"d", params.d},
               {"seed", opt.seed}};

  ske::analysis::ScoreSet scores;
  if (opt.score_mode == "rv") {
    // single-stream RV collision fractions under one shared nonce: direct
    // estimates of the per-index collision probability P
    const Nonce nonce = nonce_from_seed(opt.seed, 3);
    ske::rsv::Projector proj(nonce, params.m, params.p, params.d);
    const auto rvs = proj.hash_batch(pop.vectors);
    auto score_of = [&](const std::pair<std::uint32_t, std::uint32_t>& pr) {
      return double(ske::rsv::collision_count(rvs[pr.first], rvs[pr.second])) /
             params.m;
    };
    for (const auto& pr : pairs.genuine) scores.genuine.push_back(score_of(pr));
    for (const auto& pr : pairs.imposter) {
      scores.imposter.push_back(score_of(pr));
    }
    write_score_csv(out_dir / "genuine_scores.csv", scores.genuine, nullptr,
                    nullptr);
    write_score_csv(out_dir / "imposter_scores.csv", scores.imposter, nullptr,
                    nullptr);

    double p_max = 0.0, p_sum = 0.0;
    for (double s : scores.imposter) p_max = std::max(p_max, s);
    for (double s : scores.genuine) p_sum += s;
    summary["p_max"] = p_max;
    summary["p_genuine"] = p_sum / double(scores.genuine.size());
  } else {
    // full enroll+retrieve attempts; per-enrollment nonces, one helper per
    // distinct enrollee
    std::map<std::uint32_t, ske::HelperData> helpers;
    std::map<std::uint32_t, std::vector<std::uint8_t>> secrets;
    auto helper_for = [&](std::uint32_t flat) -> const ske::HelperData& {
      auto it = helpers.find(flat);
      if (it == helpers.end()) {
        const auto secret = generate_secret(params, opt.seed ^ (flat + 1));
        const Nonce n = nonce_from_seed(opt.seed, 10 + 2 * std::uint64_t(flat));
        const Nonce nhat =
            nonce_from_seed(opt.seed, 11 + 2 * std::uint64_t(flat));
        it = helpers
                 .emplace(flat, ske::enroll(pop.vectors[flat], secret, params,
                                            n, nhat))
                 .first;
        secrets.emplace(flat, secret);
      }
      return it->second;
    };

    auto run_attempts =
        [&](const std::vector<std::pair<std::uint32_t, std::uint32_t>>& list) {
          std::vector<AttemptResult> results;
          results.reserve(list.size());
          for (const auto& [enrollee, query] : list) {
            const auto& helper = helper_for(enrollee);
            const auto start = std::chrono::steady_clock::now();
            const auto outcome = ske::retrieve(pop.vectors[query], helper);
            const auto stop = std::chrono::steady_clock::now();
            AttemptResult r;
            r.score = double(outcome.unique_pairs) / params.m;
            r.success =
                outcome.success() && *outcome.secret == secrets.at(enrollee);
            r.t = outcome.unique_pairs;
            r.seconds = std::chrono::duration<double>(stop - start).count();
            results.push_back(r);
          }
          return results;
        };

    const auto genuine = run_attempts(pairs.genuine);
    const auto imposter = run_attempts(pairs.imposter);

    auto unpack = [](const std::vector<AttemptResult>& rs,
                     std::vector<double>& score, std::vector<int>& success,
                     std::vector<std::uint32_t>& t) {
      for (const auto& r : rs) {
        score.push_back(r.score);
        success.push_back(r.success);
        t.push_back(r.t);
      }
    };
    std::vector<int> gen_success, imp_success;
    std::vector<std::uint32_t> gen_t, imp_t;
    unpack(genuine, scores.genuine, gen_success, gen_t);
    unpack(imposter, scores.imposter, imp_success, imp_t);
    write_score_csv(out_dir / "genuine_scores.csv", scores.genuine,
                    &gen_success, &gen_t);
    write_score_csv(out_dir / "imposter_scores.csv", scores.imposter,
                    &imp_success, &imp_t);

    double gen_rate = 0, imp_rate = 0, gen_time = 0, imp_time = 0;
    for (const auto& r : genuine) {
      gen_rate += r.success;
      gen_time += r.seconds;
    }
    for (const auto& r : imposter) {
      imp_rate += r.success;
      imp_time += r.seconds;
    }
    summary["genuine_success_rate"] = gen_rate / double(genuine.size());
    summary["imposter_success_rate"] = imp_rate / double(imposter.size());
    summary["score_max_imposter"] =
        *std::max_element(scores.imposter.begin(), scores.imposter.end());
    summary["score_mean_genuine"] =
        std::accumulate(scores.genuine.begin(), scores.genuine.end(), 0.0) /
        double(scores.genuine.size());

    // wall-clock means are machine-dependent; kept out of the
    // deterministic artifacts
    write_json(out_dir / "timings.json",
               json{{"mean_decode_genuine_s", gen_time / genuine.size()},
                    {"mean_decode_imposter_s", imp_time / imposter.size()}});
  }

  const auto rates = ske::analysis::compute_rates(scores);
  {
    std::ofstream out(out_dir / "rates.csv");
    out << "threshold,far,frr\n";
    char buf[96];
    for (std::size_t i = 0; i < rates.thresholds.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g",
                    rates.thresholds[i], rates.far[i], rates.frr[i]);
      out << buf << '\n';
    }
  }
  summary["eer"] = rates.eer;
  summary["eer_threshold"] = rates.eer_threshold;
  summary["frr_at_zero_far"] = rates.frr_at_zero_far;

  write_json(out_dir / "summary.json", summary);
  std::cout << summary.dump(2) << '\n';
  return 0;
}

// --- security-report ----------------------------------------------------

int cmd_security_report(const Options& opt) {
  const ske::SkeParams params = parse_params(opt);

  double p_max = opt.p_max;
  double p_genuine = opt.p_genuine;
  if (!opt.eval_summary_path.empty()) {
    std::ifstream in(opt.eval_summary_path);
    if (!in) {
      throw ske::ParseError("cannot open " + opt.eval_summary_path, 0, 0);
    }
    json summary;
    in >> summary;
    if (!summary.contains("p_max") || !summary.contains("p_genuine")) {
      throw ske::ParseError(
          "eval summary lacks p_max/p_genuine; rerun eval with "
          "--score-mode rv",
          0, 0);
    }
    p_max = summary["p_max"].get<double>();
    p_genuine = summary["p_genuine"].get<double>();
  }
  if (!(p_max >= 0.0 && p_max <= 1.0) ||
      !(p_genuine >= 0.0 && p_genuine <= 1.0)) {
    throw ske::DomainError(
        "security-report needs --p-max/--p-genuine in [0,1] or "
        "--eval-summary");
  }

  std::vector<double> q_values = opt.q_values;
  if (q_values.empty()) {
    q_values = {64.0, 1024.0, 1048576.0, 1073741824.0, 1099511627776.0,
                1125899906842624.0};
  }
  const auto report = ske::analysis::build_security_report(
      params.m, params.k, params.p, p_max, p_genuine, q_values);
  const json out = report_to_json(report);
  if (!opt.out_dir.empty()) {
    write_json(ensure_out_dir(opt) / "security_report.json", out);
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

// --- unlinkability ------------------------------------------------------

int cmd_unlinkability(const Options& opt) {
  const ske::SkeParams params = parse_params(opt);
  const fs::path out_dir = ensure_out_dir(opt);
  if (opt.subjects < 2) {
    throw ske::DomainError("unlinkability needs at least 2 subjects");
  }

  const auto pop = ske::dataset::gen_population(
      opt.subjects, opt.impressions, params.d, opt.cos_mean, opt.cos_std,
      opt.seed);
  const auto pairs = select_pairs(pop, opt);

  // per-sample fresh nonce: every comparison crosses nonce boundaries
  std::vector<ske::rsv::ResilientVector> rvs;
  rvs.reserve(pop.vectors.size());
  for (std::size_t flat = 0; flat < pop.vectors.size(); ++flat) {
    const Nonce nonce = nonce_from_seed(opt.seed, 100 + flat);
    rvs.push_back(
        ske::rsv::iom_hash(pop.vectors[flat], params.m, params.p, nonce));
  }

  auto score_of = [&](const std::pair<std::uint32_t, std::uint32_t>& pr) {
    return double(ske::rsv::collision_count(rvs[pr.first], rvs[pr.second])) /
           params.m;
  };
  std::vector<double> mated, nonmated;
  for (const auto& pr : pairs.genuine) mated.push_back(score_of(pr));
  for (const auto& pr : pairs.imposter) nonmated.push_back(score_of(pr));

  const auto link =
      ske::analysis::linkability(mated, nonmated, opt.omega, opt.bins);
  {
    std::ofstream out(out_dir / "linkability.csv");
    out << "bin_center,mated_density,nonmated_density,d_curve\n";
    char buf[128];
    for (std::size_t b = 0; b < link.bin_centers.size(); ++b) {
      std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g",
                    link.bin_centers[b], link.mated_density[b],
                    link.nonmated_density[b], link.d_curve[b]);
      out << buf << '\n';
    }
  }
  write_score_csv(out_dir / "mated_scores.csv", mated, nullptr, nullptr);
  write_score_csv(out_dir / "nonmated_scores.csv", nonmated, nullptr, nullptr);

  const json out{{"d_sys", link.d_sys},
                 {"omega", opt.omega},
                 {"bins", opt.bins},
                 {"mated_count", mated.size()},
                 {"nonmated_count", nonmated.size()},
                 {"m", params.m},
                 {"p", params.p},
                 {"seed", opt.seed}};
  write_json(out_dir / "summary.json", out);
  std::cout << out.dump(2) << '\n';
  return 0;
}

// --- revocability -------------------------------------------------------

int cmd_revocability(const Options& opt) {
  const ske::SkeParams params = parse_params(opt);
  const fs::path out_dir = ensure_out_dir(opt);
  if (opt.subjects < 2) {
    throw ske::DomainError("revocability needs at least 2 subjects");
  }
  if (opt.subjects > params.d) {
    throw ske::DomainError(
        "revocability uses pairwise-orthogonal subject vectors and needs "
        "subjects <= d");
  }

  // Decorrelated subject vectors isolate the nonce effect: imposter
  // comparisons sit exactly at the 1/F independence baseline, as do
  // re-nonced same-subject comparisons.
  const auto vectors =
      ske::dataset::orthonormal_vectors(opt.subjects, params.d, opt.seed);

  const int kRenonce = 8;
  std::vector<std::vector<ske::rsv::ResilientVector>> rvs(kRenonce);
  for (int nidx = 0; nidx < kRenonce; ++nidx) {
    const Nonce nonce = nonce_from_seed(opt.seed, 200 + nidx);
    ske::rsv::Projector proj(nonce, params.m, params.p, params.d);
    rvs[nidx] = proj.hash_batch(vectors);
  }

  std::vector<double> pseudo, imposter;
  for (std::uint32_t s = 0; s < opt.subjects; ++s) {
    for (int a = 0; a < kRenonce; ++a) {
      for (int b = a + 1; b < kRenonce; ++b) {
        pseudo.push_back(
            double(ske::rsv::collision_count(rvs[a][s], rvs[b][s])) /
            params.m);
      }
    }
  }
  for (std::uint32_t sa = 0; sa < opt.subjects; ++sa) {
    for (std::uint32_t sb = sa + 1; sb < opt.subjects; ++sb) {
      imposter.push_back(
          double(ske::rsv::collision_count(rvs[0][sa], rvs[0][sb])) /
          params.m);
    }
  }

  const double ks = ske::analysis::ks_distance(pseudo, imposter);
  write_score_csv(out_dir / "pseudo_imposter_scores.csv", pseudo, nullptr,
                  nullptr);
  write_score_csv(out_dir / "imposter_scores.csv", imposter, nullptr, nullptr);

  const json out{{"ks_distance", ks},
                 {"pseudo_imposter_count", pseudo.size()},
                 {"imposter_count", imposter.size()},
                 {"renonce_count", kRenonce},
                 {"m", params.m},
                 {"p", params.p},
                 {"seed", opt.seed}};
  write_json(out_dir / "summary.json", out);
  std::cout << out.dump(2) << '\n';
  return 0;
}

}  // namespace

// local SHA-256 helper for the optional secret-hash sidecar
#include <openssl/evp.h>
namespace {
std::vector<std::uint8_t> sha256_of(const std::vector<std::uint8_t>& data) {
  std::vector<std::uint8_t> out(32);
  unsigned int len = 32;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, out.data(), &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw ske::Error("SHA-256 computation failed");
  }
  EVP_MD_CTX_free(ctx);
  return out;
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetric keyring encryption: bind secrets to real-valued "
               "vectors and analyze retrieval rates and security margins"};
  app.require_subcommand(1);

  Options opt;
  if (const char* env_seed = std::getenv("SKE_SEED")) {
    opt.seed = std::strtoull(env_seed, nullptr, 10);
  }

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--params", opt.params,
                    "d,m,p,k,ell (dimension, hash count, prime, secret "
                    "length, tag bits)")
        ->delimiter(',');
    cmd->add_option("--seed", opt.seed, "master seed (env SKE_SEED fallback)");
    cmd->add_option("--out", opt.out_dir, "output directory");
  };
  auto add_population = [&](CLI::App* cmd) {
    cmd->add_option("--subjects", opt.subjects, "synthetic subject count");
    cmd->add_option("--impressions", opt.impressions,
                    "impressions per subject");
    cmd->add_option("--cos-mean", opt.cos_mean,
                    "within-subject cosine similarity mean");
    cmd->add_option("--cos-std", opt.cos_std,
                    "within-subject cosine similarity spread");
    cmd->add_option("--trials", opt.trials,
                    "cap on attempts per class (0 = all protocol pairs)");
  };

  CLI::App* enroll = app.add_subcommand("enroll", "bind a secret to a vector");
  add_common(enroll);
  enroll->add_option("--vectors", opt.vectors_path,
                     "CSV vector file; the first vector enrolls");
  enroll->add_option("--helper", opt.helper_path, "helper-data output path");
  enroll->add_option("--secret-hex", opt.secret_hex,
                     "secret bytes in hex (generated from seed if omitted)");
  enroll->add_flag("--store-secret-hash", opt.store_secret_hash,
                   "write SHA-256 of the secret next to the helper file");

  CLI::App* retrieve =
      app.add_subcommand("retrieve", "recover a secret with a query vector");
  add_common(retrieve);
  retrieve->add_option("--vectors", opt.vectors_path,
                       "CSV vector file; the first vector queries");
  retrieve->add_option("--helper", opt.helper_path, "helper-data input path");

  CLI::App* eval =
      app.add_subcommand("eval", "rate evaluation over a synthetic population");
  add_common(eval);
  add_population(eval);
  eval->add_option("--protocol", opt.protocol, "full or 1vs1");
  eval->add_option("--score-mode", opt.score_mode,
                   "retrieve (full pipeline) or rv (hash collision scores)");

  CLI::App* report =
      app.add_subcommand("security-report", "closed-form security margins");
  add_common(report);
  report->add_option("--p-max", opt.p_max,
                     "maximum imposter collision probability");
  report->add_option("--p-genuine", opt.p_genuine,
                     "mean genuine collision probability");
  report->add_option("--eval-summary", opt.eval_summary_path,
                     "summary.json from eval --score-mode rv");
  report->add_option("--q", opt.q_values, "tag counts for the advantage sweep")
      ->delimiter(',');

  CLI::App* unlink =
      app.add_subcommand("unlinkability", "cross-nonce linkability measure");
  add_common(unlink);
  add_population(unlink);
  unlink->add_option("--protocol", opt.protocol, "full or 1vs1");
  unlink->add_option("--omega", opt.omega, "prior ratio in the local measure");
  unlink->add_option("--bins", opt.bins, "histogram bins on [0,1]");

  CLI::App* revoke = app.add_subcommand(
      "revocability", "pseudo-imposter vs imposter distribution check");
  add_common(revoke);
  revoke->add_option("--subjects", opt.subjects, "subject count (<= d)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (enroll->parsed()) return cmd_enroll(opt);
    if (retrieve->parsed()) return cmd_retrieve(opt);
    if (eval->parsed()) return cmd_eval(opt);
    if (report->parsed()) return cmd_security_report(opt);
    if (unlink->parsed()) return cmd_unlinkability(opt);
    if (revoke->parsed()) return cmd_revocability(opt);
  } catch (const ske::ParseError& e) {
    std::cout << json{{"error", {{"type", "parse"}, {"message", e.what()}}}}
                     .dump(2)
              << '\n';
    return kExitDataError;
  } catch (const ske::MalformedContainerError& e) {
    std::cout << json{{"error", {{"type", "container"}, {"message", e.what()}}}}
                     .dump(2)
              << '\n';
    return kExitDataError;
  } catch (const ske::VersionUnsupportedError& e) {
    std::cout << json{{"error", {{"type", "version"}, {"message", e.what()}}}}
                     .dump(2)
              << '\n';
    return kExitDataError;
  } catch (const ske::InvariantViolationError& e) {
    std::cout << json{{"error", {{"type", "invariant"}, {"message", e.what()}}}}
                     .dump(2)
              << '\n';
    return kExitDataError;
  } catch (const ske::ZeroVectorError& e) {
    std::cout
        << json{{"error", {{"type", "zero_vector"}, {"message", e.what()}}}}
               .dump(2)
        << '\n';
    return kExitDataError;
  } catch (const ske::SecretTooLargeError& e) {
    std::cout
        << json{{"error", {{"type", "secret_too_large"}, {"message", e.what()}}}}
               .dump(2)
        << '\n';
    return kExitDataError;
  } catch (const ske::InsufficientDiversityError& e) {
    std::cout
        << json{{"error", {{"type", "diversity"}, {"message", e.what()}}}}
               .dump(2)
        << '\n';
    return kExitDataError;
  } catch (const ske::DimensionMismatchError& e) {
    std::cout << json{{"error", {{"type", "dimension"}, {"message", e.what()}}}}
                     .dump(2)
              << '\n';
    return kExitDataError;
  } catch (const ske::DomainError& e) {
    std::cout << json{{"error", {{"type", "config"}, {"message", e.what()}}}}
                     .dump(2)
              << '\n';
    return kExitUsage;
  } catch (const ske::Error& e) {
    std::cout << json{{"error", {{"type", "internal"}, {"message", e.what()}}}}
                     .dump(2)
              << '\n';
    return kExitDataError;
  }
  return kExitUsage;
}
