#include "spinstore/operators.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace spinstore {

namespace {

using Complex = std::complex<double>;

void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

int dim_for(int n_spins) {
  require(n_spins >= 1 && n_spins <= 30, "spin count out of range");
  return 1 << n_spins;
}

Eigen::Matrix2cd half_pauli(Axis axis) {
  Eigen::Matrix2cd m;
  switch (axis) {
    case Axis::X:
      m << 0.0, 0.5, 0.5, 0.0;
      break;
    case Axis::Y:
      m << 0.0, Complex(0.0, -0.5), Complex(0.0, 0.5), 0.0;
      break;
    case Axis::Z:
      m << 0.5, 0.0, 0.0, -0.5;
      break;
  }
  return m;
}

// Kronecker chain with the given 2x2 block at each listed site and identity
// elsewhere. Site 0 is the leftmost (most significant) factor.
Eigen::MatrixXcd site_product(int n_spins, const std::vector<int>& sites,
                              const Eigen::Matrix2cd& block) {
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(1, 1);
  for (int k = 0; k < n_spins; ++k) {
    const bool hit = std::find(sites.begin(), sites.end(), k) != sites.end();
    const Eigen::MatrixXcd factor =
        hit ? Eigen::MatrixXcd(block) : Eigen::MatrixXcd(Eigen::Matrix2cd::Identity());
    acc = Eigen::kroneckerProduct(acc, factor).eval();
  }
  return acc;
}

void check_site(int n_spins, int site, const char* what) {
  require(site >= 0 && site < n_spins, std::string(what) + " site index out of range");
}

struct KindAxes {
  Axis doubled;
  Axis minus_1;
  Axis minus_2;
};

KindAxes axes_for(HamiltonianKind kind) {
  switch (kind) {
    case HamiltonianKind::Dz:
      return {Axis::Z, Axis::X, Axis::Y};
    case HamiltonianKind::Dy:
      return {Axis::Y, Axis::X, Axis::Z};
    case HamiltonianKind::Dx:
    default:
      return {Axis::X, Axis::Y, Axis::Z};
  }
}

// 2 I_a I_a - I_b I_b - I_c I_c for one pair, optionally truncated to the
// doubled axis for heteronuclear pairs.
Eigen::MatrixXcd pair_dipolar_term(int n_spins, int i, int j, const KindAxes& axes,
                                   bool secular) {
  Eigen::MatrixXcd term =
      2.0 * site_product(n_spins, {i, j}, half_pauli(axes.doubled));
  if (!secular) {
    term -= site_product(n_spins, {i, j}, half_pauli(axes.minus_1));
    term -= site_product(n_spins, {i, j}, half_pauli(axes.minus_2));
  }
  return term;
}

}  // namespace

HermitianOperator make_hermitian(int n_spins, Eigen::MatrixXcd matrix) {
  const int dim = dim_for(n_spins);
  require(matrix.rows() == dim && matrix.cols() == dim,
          "operator dimension does not match the spin count");
  require(matrix.allFinite(), "operator entries must be finite");
  const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
  require((matrix - matrix.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
          "operator must be Hermitian");
  return HermitianOperator{n_spins, std::move(matrix)};
}

HermitianOperator scaled(const HermitianOperator& op, double factor) {
  require(std::isfinite(factor), "operator scale factor must be finite");
  return HermitianOperator{op.n_spins, factor * op.matrix};
}

Partition make_partition(int n_sites, std::vector<int> subset_a) {
  require(n_sites >= 1, "partition needs at least one site");
  std::sort(subset_a.begin(), subset_a.end());
  require(std::adjacent_find(subset_a.begin(), subset_a.end()) == subset_a.end(),
          "partition subset has duplicate sites");
  for (int site : subset_a)
    require(site >= 0 && site < n_sites, "partition site index out of range");

  Partition partition;
  partition.n_sites = n_sites;
  partition.subset_a = std::move(subset_a);
  std::size_t next = 0;
  for (int site = 0; site < n_sites; ++site) {
    if (next < partition.subset_a.size() && partition.subset_a[next] == site)
      ++next;
    else
      partition.subset_b.push_back(site);
  }
  return partition;
}

HermitianOperator single_spin_op(int n_spins, int site, Axis axis) {
  dim_for(n_spins);
  check_site(n_spins, site, "operator");
  return HermitianOperator{n_spins, site_product(n_spins, {site}, half_pauli(axis))};
}

HermitianOperator collective_spin_op(int n_spins, Axis axis) {
  const int dim = dim_for(n_spins);
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dim, dim);
  for (int site = 0; site < n_spins; ++site)
    acc += site_product(n_spins, {site}, half_pauli(axis));
  return HermitianOperator{n_spins, std::move(acc)};
}

HermitianOperator pair_product_op(int n_spins, int site_i, int site_j, Axis axis) {
  dim_for(n_spins);
  check_site(n_spins, site_i, "operator");
  check_site(n_spins, site_j, "operator");
  require(site_i != site_j, "pair operator needs two distinct sites");
  return HermitianOperator{
      n_spins, site_product(n_spins, {site_i, site_j}, half_pauli(axis))};
}

HermitianOperator dipolar_hamiltonian(const CouplingMatrix& couplings,
                                      HamiltonianKind kind,
                                      bool secular_hetero_only) {
  const int n = couplings.size();
  const int dim = dim_for(n);
  const KindAxes axes = axes_for(kind);

  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = couplings.values(i, j);
      if (d == 0.0) continue;
      const bool secular = secular_hetero_only && couplings.hetero(i, j);
      h += d * pair_dipolar_term(n, i, j, axes, secular);
    }
  }
  return make_hermitian(n, std::move(h));
}

PartitionedHamiltonian partition_hamiltonian(const CouplingMatrix& couplings,
                                             const Partition& partition,
                                             HamiltonianKind kind,
                                             bool secular_hetero_only) {
  const int n = couplings.size();
  require(partition.n_sites == n, "partition does not match the coupling matrix");
  const int dim = dim_for(n);
  const KindAxes axes = axes_for(kind);

  std::vector<bool> in_a(n, false);
  for (int site : partition.subset_a) {
    check_site(n, site, "partition");
    in_a[site] = true;
  }

  Eigen::MatrixXcd h_a = Eigen::MatrixXcd::Zero(dim, dim);
  Eigen::MatrixXcd h_b = Eigen::MatrixXcd::Zero(dim, dim);
  Eigen::MatrixXcd h_ab = Eigen::MatrixXcd::Zero(dim, dim);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = couplings.values(i, j);
      if (d == 0.0) continue;
      const bool secular = secular_hetero_only && couplings.hetero(i, j);
      Eigen::MatrixXcd term = d * pair_dipolar_term(n, i, j, axes, secular);
      if (in_a[i] && in_a[j])
        h_a += term;
      else if (!in_a[i] && !in_a[j])
        h_b += term;
      else
        h_ab += term;
    }
  }
  return PartitionedHamiltonian{make_hermitian(n, std::move(h_a)),
                                make_hermitian(n, std::move(h_b)),
                                make_hermitian(n, std::move(h_ab))};
}

HermitianOperator xy_chain_hamiltonian(int n_spins,
                                       const std::vector<double>& bonds) {
  const int dim = dim_for(n_spins);
  require(static_cast<int>(bonds.size()) == n_spins - 1,
          "bond list must have one entry per adjacent pair");

  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (int k = 0; k + 1 < n_spins; ++k) {
    const double j = bonds[k];
    require(std::isfinite(j), "bond strength must be finite");
    if (j == 0.0) continue;
    h += j * site_product(n_spins, {k, k + 1}, half_pauli(Axis::X));
    h += j * site_product(n_spins, {k, k + 1}, half_pauli(Axis::Y));
  }
  return make_hermitian(n_spins, std::move(h));
}

std::vector<double> transfer_chain_bonds(int n_spins, double lambda) {
  require(n_spins >= 2, "transfer chain needs at least two sites");
  require(std::isfinite(lambda) && lambda > 0.0, "bond scale must be positive");
  std::vector<double> bonds(n_spins - 1);
  for (int k = 1; k < n_spins; ++k)
    bonds[k - 1] = lambda * std::sqrt(static_cast<double>(k) * (n_spins - k));
  return bonds;
}

HermitianOperator transfer_chain_hamiltonian(int n_spins, double lambda) {
  return xy_chain_hamiltonian(n_spins, transfer_chain_bonds(n_spins, lambda));
}

Eigen::MatrixXcd mirror_permutation(int n_spins) {
  const int dim = dim_for(n_spins);
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(dim, dim);
  for (int b = 0; b < dim; ++b) {
    int reversed = 0;
    for (int bit = 0; bit < n_spins; ++bit)
      if (b & (1 << bit)) reversed |= 1 << (n_spins - 1 - bit);
    p(reversed, b) = 1.0;
  }
  return p;
}

}  // namespace spinstore
