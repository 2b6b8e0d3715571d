#include "ske/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ske::dataset {
namespace {

double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vector& a) { return std::sqrt(dot(a, a)); }

Vector random_unit(std::uint32_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(d);
  double n = 0.0;
  do {
    for (auto& x : v) x = normal(rng);
    n = norm(v);
  } while (n == 0.0);
  for (auto& x : v) x /= n;
  return v;
}

// Unit vector orthogonal to the unit vector u.
Vector orthogonal_unit(const Vector& u, std::mt19937_64& rng) {
  Vector w;
  double n = 0.0;
  do {
    w = random_unit(std::uint32_t(u.size()), rng);
    const double proj = dot(w, u);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= proj * u[i];
    n = norm(w);
  } while (n < 1e-8);
  for (auto& x : w) x /= n;
  return w;
}

Vector blend(const Vector& u, const Vector& w, double cosine) {
  const double s = std::sqrt(std::max(0.0, 1.0 - cosine * cosine));
  Vector v(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) v[i] = cosine * u[i] + s * w[i];
  return v;
}

}  // namespace

const Vector& Population::at(std::uint32_t subject,
                             std::uint32_t impression) const {
  return vectors.at(flat_index(subject, impression));
}

std::pair<Vector, Vector> gen_pair(std::uint32_t d, double target_cos,
                                   std::mt19937_64& rng) {
  if (d < 2) throw DomainError("pair generation needs dimension >= 2");
  if (!(target_cos >= -1.0 && target_cos <= 1.0)) {
    throw DomainError("target cosine must lie in [-1,1]");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector x(d);
  double n = 0.0;
  do {
    for (auto& v : x) v = normal(rng);
    n = norm(x);
  } while (n == 0.0);

  Vector xhat(x);
  for (auto& v : xhat) v /= n;
  const Vector yhat = orthogonal_unit(xhat, rng);
  return {std::move(x), blend(xhat, yhat, target_cos)};
}

Population gen_population(std::uint32_t subjects, std::uint32_t impressions,
                          std::uint32_t d, double cos_mean, double cos_std,
                          std::uint64_t seed) {
  if (subjects < 2 || impressions < 2) {
    throw DomainError("population needs at least 2 subjects and 2 impressions");
  }
  if (d < 2) throw DomainError("population needs dimension >= 2");
  if (!(cos_mean > 0.0 && cos_mean < 1.0)) {
    throw DomainError("within-subject cosine mean must lie in (0,1)");
  }
  if (!(cos_std >= 0.0)) throw DomainError("cosine std must be >= 0");

  Population pop;
  pop.subjects = subjects;
  pop.impressions = impressions;
  pop.dim = d;
  pop.seed = seed;
  pop.cos_mean = cos_mean;
  pop.cos_std = cos_std;
  pop.vectors.reserve(std::size_t(subjects) * impressions);

  // Two impressions at latent cosine c land at pairwise cosine ~ c^2, so
  // the latent cosine centers on sqrt(cos_mean); the delta method maps the
  // pairwise spread back through the product.
  const double latent_mean = std::sqrt(cos_mean);
  const double latent_std = cos_std / (2.0 * latent_mean);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> latent_cos_dist(latent_mean, latent_std);
  for (std::uint32_t s = 0; s < subjects; ++s) {
    const Vector u = random_unit(d, rng);
    for (std::uint32_t i = 0; i < impressions; ++i) {
      const double c = std::clamp(latent_cos_dist(rng), 0.0, 1.0);
      pop.vectors.push_back(blend(u, orthogonal_unit(u, rng), c));
    }
  }
  return pop;
}

ProtocolPairs full_protocol(const Population& pop) {
  ProtocolPairs pairs;
  const std::uint32_t S = pop.subjects;
  const std::uint32_t I = pop.impressions;
  for (std::uint32_t s = 0; s < S; ++s) {
    for (std::uint32_t i = 0; i < I; ++i) {
      for (std::uint32_t j = i + 1; j < I; ++j) {
        pairs.genuine.push_back({std::uint32_t(pop.flat_index(s, i)),
                                 std::uint32_t(pop.flat_index(s, j))});
      }
    }
  }
  for (std::uint32_t a = 0; a < S; ++a) {
    for (std::uint32_t b = a + 1; b < S; ++b) {
      pairs.imposter.push_back({std::uint32_t(pop.flat_index(a, 0)),
                                std::uint32_t(pop.flat_index(b, 0))});
    }
  }
  return pairs;
}

ProtocolPairs one_vs_one_protocol(const Population& pop) {
  if (pop.impressions < 2) {
    throw DomainError("1vs1 protocol needs at least 2 impressions");
  }
  ProtocolPairs pairs = full_protocol(pop);
  pairs.genuine.clear();
  for (std::uint32_t s = 0; s < pop.subjects; ++s) {
    pairs.genuine.push_back({std::uint32_t(pop.flat_index(s, 0)),
                             std::uint32_t(pop.flat_index(s, 1))});
  }
  return pairs;
}

std::vector<Vector> orthonormal_vectors(std::uint32_t count, std::uint32_t d,
                                        std::uint64_t seed) {
  if (count < 1 || count > d) {
    throw DomainError("orthonormal set needs 1 <= count <= d");
  }
  std::mt19937_64 rng(seed);
  std::vector<Vector> basis;
  basis.reserve(count);
  while (basis.size() < count) {
    // Gram-Schmidt with one re-orthogonalization pass.
    Vector v = random_unit(d, rng);
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vector& b : basis) {
        const double proj = dot(v, b);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= proj * b[i];
      }
    }
    const double n = norm(v);
    if (n < 1e-8) continue;  // nearly dependent draw, resample
    for (auto& x : v) x /= n;
    basis.push_back(std::move(v));
  }
  return basis;
}

std::vector<Vector> load_vectors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open vector file " + path, 0, 0);

  std::vector<Vector> vectors;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Vector v;
    std::size_t pos = 0;
    std::size_t column = 1;
    while (pos <= line.size()) {
      const std::size_t comma = std::min(line.find(',', pos), line.size());
      const std::string cell = line.substr(pos, comma - pos);
      try {
        std::size_t used = 0;
        const double value = std::stod(cell, &used);
        while (used < cell.size() &&
               std::isspace(static_cast<unsigned char>(cell[used]))) {
          ++used;
        }
        if (used != cell.size()) throw std::invalid_argument("trailing junk");
        v.push_back(value);
      } catch (const std::exception&) {
        throw ParseError("invalid float '" + cell + "'", line_no, column);
      }
      ++column;
      if (comma == line.size()) break;
      pos = comma + 1;
    }
    if (!vectors.empty() && v.size() != vectors.front().size()) {
      throw DimensionMismatchError(
          "line " + std::to_string(line_no) + " has " +
          std::to_string(v.size()) + " fields, expected " +
          std::to_string(vectors.front().size()));
    }
    vectors.push_back(std::move(v));
  }
  return vectors;
}

void save_vectors(const std::vector<Vector>& vectors,
                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  char buf[64];
  for (const Vector& v : vectors) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
      if (i) out << ',';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw Error("write to " + path + " failed");
}

}  // namespace ske::dataset
