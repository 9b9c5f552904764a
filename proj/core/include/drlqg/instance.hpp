#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "drlqg/ambiguity.hpp"
#include "drlqg/lqg.hpp"
#include "drlqg/rng.hpp"

namespace drlqg {

/// Provenance of a generated instance. Informational: the matrices stored
/// alongside it are authoritative.
struct GeneratorRecipe {
  std::string name;
  std::uint64_t seed = 0;
  double rho = 0.0;

  bool operator==(const GeneratorRecipe&) const = default;
};

struct Instance {
  TimeVaryingSystem system;
  AmbiguitySpec ambiguity;
  std::optional<GeneratorRecipe> recipe;

  void validate() const;
};

/// Exact (bitwise) equality of all matrices, radii and the recipe.
bool operator==(const Instance& a, const Instance& b);

inline constexpr const char* kBandedRecipe = "banded-0.1-identity";

/// Random covariance with spectrum in [1, 2]: M uniform on [0,1]^{d x d}
/// (row-major draws), orthonormal eigenvectors Xi of M + M^T (sym_eig sign
/// convention), d eigenvalues uniform on [1, 2], result Xi diag(lambda) Xi^T.
Matrix random_nominal_covariance(Eigen::Index d, PortableRng& rng);

/// A_t = 0.1 (I + superdiagonal ones), B_t = C_t = Q_t = R_t = identity
/// (rectangular identities when dimensions differ), every radius equal to
/// `rho`, and nominal covariances drawn in the order X0, W_0..W_{T-1},
/// V_0..V_{T-1} with random_nominal_covariance from one PortableRng(seed).
Instance generate_instance(Eigen::Index n, Eigen::Index m, Eigen::Index p, int T,
                           std::uint64_t seed, double rho);

}  // namespace drlqg
