#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ske/errors.hpp"

namespace ske::field {

// Field elements are values in [0, p-1] for a prime p <= 2^16. The small
// bound keeps every element representable in the fixed-width sketch
// encoding; intermediates are widened to 64 bits where needed.
using Element = std::uint32_t;

bool is_prime(std::uint32_t n);

struct FieldParams {
  std::uint32_t p;

  explicit FieldParams(std::uint32_t prime);
};

Element add(Element a, Element b, std::uint32_t p);
Element sub(Element a, Element b, std::uint32_t p);
Element mul(Element a, Element b, std::uint32_t p);
Element pow(Element base, std::uint64_t exp, std::uint32_t p);

// Multiplicative inverse via Fermat exponentiation a^(p-2). Requires a != 0.
Element inv(Element a, std::uint32_t p);

// Polynomial of order k-1 over GF(p); coeffs[j] multiplies x^j and the
// length is exactly k. A zero leading coefficient is legal: the secret
// bytes dictate every coefficient.
struct FieldPoly {
  std::uint32_t p;
  std::vector<Element> coeffs;

  std::size_t k() const { return coeffs.size(); }
  bool operator==(const FieldPoly&) const = default;
};

struct Point {
  Element x;
  Element y;
  bool operator==(const Point&) const = default;
};

// Horner evaluation of poly at x.
Element poly_eval(const FieldPoly& poly, Element x);

// Reconstructs the unique polynomial of order k-1 through the first k
// points in ascending-x order. Exact duplicates are collapsed; two points
// sharing an x with different y raise DuplicateXError. Any points beyond
// the first k must lie on the reconstructed polynomial, otherwise
// InconsistentPointsError is raised.
FieldPoly lagrange_interpolate(std::span<const Point> points, std::size_t k,
                               std::uint32_t p);

// Interprets the secret as a big-endian integer N < p^k and returns its
// base-p digits, least significant first, padded to length k.
FieldPoly encode_secret(std::span<const std::uint8_t> secret, std::size_t k,
                        std::uint32_t p);

// Inverse of encode_secret: canonical minimal big-endian bytes (empty for
// the zero polynomial).
std::vector<std::uint8_t> decode_secret(const FieldPoly& poly);

}  // namespace ske::field
