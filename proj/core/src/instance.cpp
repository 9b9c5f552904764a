#include "drlqg/instance.hpp"

#include "drlqg/error.hpp"

namespace drlqg {

namespace {

bool same(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

bool same(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same(a[i], b[i])) return false;
  }
  return true;
}

}  // namespace

void Instance::validate() const {
  system.validate();
  ambiguity.validate(system);
}

bool operator==(const Instance& a, const Instance& b) {
  const auto& sa = a.system;
  const auto& sb = b.system;
  const auto& aa = a.ambiguity;
  const auto& ab = b.ambiguity;
  return same(sa.A, sb.A) && same(sa.B, sb.B) && same(sa.C, sb.C) &&
         same(sa.Q, sb.Q) && same(sa.R, sb.R) &&
         same(aa.nominal.X0, ab.nominal.X0) && same(aa.nominal.W, ab.nominal.W) &&
         same(aa.nominal.V, ab.nominal.V) && aa.rho_x0 == ab.rho_x0 &&
         aa.rho_w == ab.rho_w && aa.rho_v == ab.rho_v && a.recipe == b.recipe;
}

Matrix random_nominal_covariance(Eigen::Index d, PortableRng& rng) {
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = rng.uniform01();
  }
  const SymEig eig = sym_eig(SymMatrix(m + m.transpose()));
  Vector lambda(d);
  for (Eigen::Index i = 0; i < d; ++i) lambda(i) = rng.uniform(1.0, 2.0);
  return symmetrize(eig.vectors * lambda.asDiagonal() * eig.vectors.transpose());
}

Instance generate_instance(Eigen::Index n, Eigen::Index m, Eigen::Index p, int T,
                           std::uint64_t seed, double rho) {
  DRLQG_THROW_UNLESS(n >= 1 && m >= 1 && p >= 1 && T >= 1, ErrorKind::kInvalidInput,
                     "generate_instance: dimensions and horizon must be >= 1");
  DRLQG_THROW_UNLESS(rho >= 0.0, ErrorKind::kInvalidInput,
                     "generate_instance: radius must be >= 0");
  Matrix a = Matrix::Identity(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) a(i, i + 1) = 1.0;
  a *= 0.1;

  Instance inst;
  auto& sys = inst.system;
  for (int t = 0; t < T; ++t) {
    sys.A.push_back(a);
    sys.B.push_back(Matrix::Identity(n, m));
    sys.C.push_back(Matrix::Identity(p, n));
    sys.Q.push_back(Matrix::Identity(n, n));
    sys.R.push_back(Matrix::Identity(m, m));
  }
  sys.Q.push_back(Matrix::Identity(n, n));

  PortableRng rng(seed);
  auto& nominal = inst.ambiguity.nominal;
  nominal.X0 = random_nominal_covariance(n, rng);
  for (int t = 0; t < T; ++t) nominal.W.push_back(random_nominal_covariance(n, rng));
  for (int t = 0; t < T; ++t) nominal.V.push_back(random_nominal_covariance(p, rng));
  inst.ambiguity.rho_x0 = rho;
  inst.ambiguity.rho_w.assign(T, rho);
  inst.ambiguity.rho_v.assign(T, rho);
  inst.recipe = GeneratorRecipe{kBandedRecipe, seed, rho};
  return inst;
}

}  // namespace drlqg
