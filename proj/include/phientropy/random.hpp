#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "phientropy/hermitian.hpp"

namespace phientropy {

using Rng = std::mt19937_64;

/// Derives an independent generator for the stream named `purpose` with
/// index `index` from a single master seed. Streams never share state, so
/// adding a new purpose leaves existing streams untouched.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose, std::uint64_t index = 0);
Rng make_stream(std::uint64_t seed, std::string_view purpose, std::uint64_t index = 0);

/// Entries i.i.d. standard complex Gaussian (real and imaginary parts of
/// variance 1/2 each).
CMatrix random_complex_gaussian(int rows, int cols, Rng& rng);

/// Random Hermitian matrix (G + G*)/2 with G standard complex Gaussian.
HermitianMatrix random_hermitian(int d, Rng& rng);

/// G G* + ridge I with G standard complex Gaussian.
HermitianMatrix random_positive_definite(int d, Rng& rng, double ridge = 1e-3);

/// Haar-distributed unitary via QR of a complex Gaussian matrix.
CMatrix random_unitary(int d, Rng& rng);

}  // namespace phientropy
