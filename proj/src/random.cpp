#include "phientropy/random.hpp"

#include <cmath>

#include <Eigen/QR>

namespace phientropy {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a; stable across platforms, unlike std::hash.
std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose, std::uint64_t index) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ fnv1a(purpose));
  h = splitmix64(h ^ index);
  return h;
}

Rng make_stream(std::uint64_t seed, std::string_view purpose, std::uint64_t index) {
  return Rng(derive_seed(seed, purpose, index));
}

CMatrix random_complex_gaussian(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  CMatrix g(rows, cols);
  // Column-major fill with re drawn before im keeps the stream order fixed.
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = Complex(re, im);
    }
  }
  return g;
}

HermitianMatrix random_hermitian(int d, Rng& rng) {
  const CMatrix g = random_complex_gaussian(d, d, rng);
  return HermitianMatrix(g);
}

HermitianMatrix random_positive_definite(int d, Rng& rng, double ridge) {
  const CMatrix g = random_complex_gaussian(d, d, rng);
  CMatrix m = g * g.adjoint();
  m.diagonal().array() += ridge;
  return HermitianMatrix(m);
}

CMatrix random_unitary(int d, Rng& rng) {
  const CMatrix g = random_complex_gaussian(d, d, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * CMatrix::Identity(d, d);
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j) {
    const Complex rjj = r(j, j);
    const double mag = std::abs(rjj);
    if (mag > 0.0) q.col(j) *= rjj / mag;
  }
  return q;
}

}  // namespace phientropy
