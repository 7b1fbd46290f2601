#pragma once

#include <vector>

#include <Eigen/Dense>

#include "spinstore/spin_system.hpp"

// Dense spin-1/2 operator assembly.
//
// Basis convention: site 0 occupies the most significant bit of the basis
// index. Basis state |b> has site k pointing up (Iz = +1/2) when bit
// (n - 1 - k) of b is clear and down when it is set, so index 0 is the fully
// polarized up state. Matrices are dense and scale as 4^n; beyond roughly 13
// spins this representation stops being practical.

namespace spinstore {

enum class Axis { X, Y, Z };

// Distinguished axis of the two-spin dipolar form: Dz doubles the zz term
// and subtracts xx and yy, Dy and Dx permute the roles. The three forms sum
// to zero for equal couplings.
enum class HamiltonianKind { Dz, Dy, Dx };

struct HermitianOperator {
  int n_spins = 0;
  Eigen::MatrixXcd matrix;

  int dim() const { return static_cast<int>(matrix.rows()); }
};

// Split of site indices into two disjoint groups covering the system.
struct Partition {
  int n_sites = 0;
  std::vector<int> subset_a;
  std::vector<int> subset_b;
};

struct PartitionedHamiltonian {
  HermitianOperator within_a;
  HermitianOperator within_b;
  HermitianOperator between;
};

// Validates dimensions and hermiticity before wrapping the matrix.
HermitianOperator make_hermitian(int n_spins, Eigen::MatrixXcd matrix);

HermitianOperator scaled(const HermitianOperator& op, double factor);

Partition make_partition(int n_sites, std::vector<int> subset_a);

// Spin-1/2 component operator I_axis acting on one site.
HermitianOperator single_spin_op(int n_spins, int site, Axis axis);

// Collective component sum_k I_axis,k over all sites.
HermitianOperator collective_spin_op(int n_spins, Axis axis);

// Product I_axis,i * I_axis,j on two distinct sites.
HermitianOperator pair_product_op(int n_spins, int site_i, int site_j, Axis axis);

// Sum over pairs of D_ij (2 I_a,i I_a,j - I_b,i I_b,j - I_c,i I_c,j) with a
// the distinguished axis. With secular_hetero_only, pairs flagged hetero in
// the couplings keep only the 2 I_a,i I_a,j part.
HermitianOperator dipolar_hamiltonian(const CouplingMatrix& couplings,
                                      HamiltonianKind kind,
                                      bool secular_hetero_only = false);

// Same pair terms routed into within_a, within_b, or between by membership.
// The three parts sum to the full Hamiltonian.
PartitionedHamiltonian partition_hamiltonian(const CouplingMatrix& couplings,
                                             const Partition& partition,
                                             HamiltonianKind kind,
                                             bool secular_hetero_only = false);

// Nearest-neighbour XY exchange sum_k J_k (I_x I_x + I_y I_y) with bond k
// joining sites k and k+1; a zero bond disconnects the chain there.
HermitianOperator xy_chain_hamiltonian(int n_spins,
                                       const std::vector<double>& bonds);

// Bond profile J_k = lambda sqrt(k (n - k)), k = 1..n-1, which swaps site
// states with their mirror images after time pi / lambda.
std::vector<double> transfer_chain_bonds(int n_spins, double lambda);

HermitianOperator transfer_chain_hamiltonian(int n_spins, double lambda);

// Unitary basis permutation reversing site order; used to compare a
// transferred state against its mirror image.
Eigen::MatrixXcd mirror_permutation(int n_spins);

}  // namespace spinstore
