#include "ske/field.hpp"

#include <algorithm>
#include <cstdint>

namespace ske::field {

bool is_prime(std::uint32_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (std::uint32_t f = 3; std::uint64_t(f) * f <= n; f += 2) {
    if (n % f == 0) return false;
  }
  return true;
}

FieldParams::FieldParams(std::uint32_t prime) : p(prime) {
  if (p < 2 || p > 65536) {
    throw DomainError("field size must satisfy 2 <= p <= 2^16, got " +
                      std::to_string(p));
  }
  if (!is_prime(p)) {
    throw DomainError("field size must be prime, got " + std::to_string(p));
  }
}

Element add(Element a, Element b, std::uint32_t p) {
  Element s = a + b;
  return s >= p ? s - p : s;
}

Element sub(Element a, Element b, std::uint32_t p) {
  return a >= b ? a - b : a + p - b;
}

Element mul(Element a, Element b, std::uint32_t p) {
  return Element((std::uint64_t(a) * b) % p);
}

Element pow(Element base, std::uint64_t exp, std::uint32_t p) {
  Element result = 1 % p;
  Element acc = base % p;
  while (exp > 0) {
    if (exp & 1) result = mul(result, acc, p);
    acc = mul(acc, acc, p);
    exp >>= 1;
  }
  return result;
}

Element inv(Element a, std::uint32_t p) {
  if (a % p == 0) throw DomainError("zero has no multiplicative inverse");
  return pow(a, p - 2, p);
}

Element poly_eval(const FieldPoly& poly, Element x) {
  if (x >= poly.p) throw DomainError("evaluation point out of field range");
  Element acc = 0;
  for (auto it = poly.coeffs.rbegin(); it != poly.coeffs.rend(); ++it) {
    acc = add(mul(acc, x, poly.p), *it, poly.p);
  }
  return acc;
}

FieldPoly lagrange_interpolate(std::span<const Point> points, std::size_t k,
                               std::uint32_t p) {
  FieldParams field(p);
  if (k == 0) throw DomainError("polynomial length k must be >= 1");

  std::vector<Point> pts(points.begin(), points.end());
  for (const Point& pt : pts) {
    if (pt.x >= p || pt.y >= p) {
      throw DomainError("interpolation point out of field range");
    }
  }
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  for (std::size_t j = 1; j < pts.size(); ++j) {
    if (pts[j].x == pts[j - 1].x) {
      throw DuplicateXError("two points share x = " + std::to_string(pts[j].x) +
                            " with different y");
    }
  }
  if (pts.size() < k) {
    throw InsufficientPointsError("need " + std::to_string(k) +
                                  " distinct points, got " +
                                  std::to_string(pts.size()));
  }

  // N(x) = prod_{j<k} (x - x_j), degree k; basis numerators come from
  // synthetic division of N by (x - x_j).
  std::vector<Element> master(k + 1, 0);
  master[0] = 1;
  std::size_t deg = 0;
  for (std::size_t j = 0; j < k; ++j) {
    Element neg_x = sub(0, pts[j].x, p);
    master[deg + 1] = master[deg];
    for (std::size_t t = deg; t > 0; --t) {
      master[t] = add(mul(master[t], neg_x, p), master[t - 1], p);
    }
    master[0] = mul(master[0], neg_x, p);
    ++deg;
  }

  FieldPoly result{p, std::vector<Element>(k, 0)};
  std::vector<Element> quotient(k, 0);
  for (std::size_t j = 0; j < k; ++j) {
    // quotient = master / (x - x_j), computed top-down.
    Element carry = 0;
    for (std::size_t t = k; t-- > 0;) {
      quotient[t] = add(master[t + 1], mul(carry, pts[j].x, p), p);
      carry = quotient[t];
    }
    Element denom = 1;
    for (std::size_t i = 0; i < k; ++i) {
      if (i == j) continue;
      denom = mul(denom, sub(pts[j].x, pts[i].x, p), p);
    }
    Element scale = mul(pts[j].y, inv(denom, p), p);
    for (std::size_t t = 0; t < k; ++t) {
      result.coeffs[t] = add(result.coeffs[t], mul(quotient[t], scale, p), p);
    }
  }

  for (std::size_t j = k; j < pts.size(); ++j) {
    if (poly_eval(result, pts[j].x) != pts[j].y) {
      throw InconsistentPointsError(
          "extra point (x=" + std::to_string(pts[j].x) + ") is off the " +
          "interpolated polynomial");
    }
  }
  return result;
}

FieldPoly encode_secret(std::span<const std::uint8_t> secret, std::size_t k,
                        std::uint32_t p) {
  FieldParams field(p);
  if (k == 0) throw DomainError("polynomial length k must be >= 1");

  // Big-endian division by p, collecting remainders as base-p digits.
  std::vector<std::uint8_t> n(secret.begin(), secret.end());
  FieldPoly poly{p, std::vector<Element>(k, 0)};
  std::size_t digit = 0;
  std::size_t start = 0;
  while (start < n.size()) {
    std::uint64_t rem = 0;
    for (std::size_t i = start; i < n.size(); ++i) {
      std::uint64_t cur = (rem << 8) | n[i];
      n[i] = std::uint8_t(cur / p);
      rem = cur % p;
    }
    if (digit >= k) {
      throw SecretTooLargeError("secret exceeds p^k for k=" +
                                std::to_string(k) +
                                ", p=" + std::to_string(p));
    }
    poly.coeffs[digit++] = Element(rem);
    while (start < n.size() && n[start] == 0) ++start;
  }
  return poly;
}

std::vector<std::uint8_t> decode_secret(const FieldPoly& poly) {
  // Horner in base p over a big-endian byte accumulator.
  std::vector<std::uint8_t> n;
  for (auto it = poly.coeffs.rbegin(); it != poly.coeffs.rend(); ++it) {
    std::uint64_t carry = *it;
    for (std::size_t i = n.size(); i-- > 0;) {
      std::uint64_t cur = std::uint64_t(n[i]) * poly.p + carry;
      n[i] = std::uint8_t(cur & 0xff);
      carry = cur >> 8;
    }
    while (carry > 0) {
      n.insert(n.begin(), std::uint8_t(carry & 0xff));
      carry >>= 8;
    }
  }
  return n;
}

}  // namespace ske::field
