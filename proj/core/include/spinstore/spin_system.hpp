#pragma once

#include <vector>

#include <Eigen/Dense>

// Geometry and coupling-strength construction for dipolar spin-1/2 systems.
//
// Pair constants follow the truncated dipolar form in natural units,
//
//   D_ij = g * gamma_i * gamma_j * (1 - 3 cos^2 theta_ij) / r_ij^3,
//
// where theta_ij is the angle between the pair vector and the field
// direction. The default g = 1 absorbs the physical prefactor; energies and
// times produced downstream are therefore dimensionless and reciprocal.

namespace spinstore {

struct SpinSite {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double gamma = 1.0;  // gyromagnetic ratio relative to the reference species
};

enum class Dimensionality { Chain, Planar, General };

struct Geometry {
  std::vector<SpinSite> sites;
  Dimensionality tag = Dimensionality::General;

  int size() const { return static_cast<int>(sites.size()); }
};

// Unit vector along the static field. field_along normalizes its argument.
struct FieldOrientation {
  Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();
};

// Pair couplings including g and gamma factors. values is symmetric with a
// zero diagonal. hetero(i, j) marks pairs with distinct gammas; operator
// assembly can truncate those pairs to their secular part.
struct CouplingMatrix {
  Eigen::MatrixXd values;
  double g = 1.0;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> hetero;

  int size() const { return static_cast<int>(values.rows()); }
};

// Orthonormal frame attached to a planar (or collinear) geometry. e1 points
// from site 0 to the nearest-indexed distinct site, normal is perpendicular
// to the site plane, and e2 completes the right-handed frame. A collinear
// geometry is treated as a degenerate plane with a deterministic e2.
struct PlaneBasis {
  Eigen::Vector3d e1;
  Eigen::Vector3d e2;
  Eigen::Vector3d normal;
};

// Couplings for the three canonical field orientations of a planar system:
// in plane along e1, in plane along e2, and along the plane normal. The
// three values matrices sum to zero pair by pair.
struct OrientationCouplings {
  CouplingMatrix along_e1;
  CouplingMatrix along_e2;
  CouplingMatrix along_normal;
};

Dimensionality classify_sites(const std::vector<SpinSite>& sites);

// Validates positions and gammas, rejects coincident sites, and classifies
// the geometry as Chain, Planar, or General.
Geometry make_geometry(std::vector<SpinSite> sites);

// Equally spaced collinear sites along x.
Geometry build_chain(int n_sites, double spacing = 1.0);

// rows x cols grid in the z = 0 plane, row-major site order, columns along x.
Geometry build_lattice(int rows, int cols, double spacing = 1.0);

FieldOrientation field_along(const Eigen::Vector3d& direction);

// Wraps an explicit coupling matrix; all pairs are treated as homonuclear.
CouplingMatrix make_couplings(Eigen::MatrixXd values, double g = 1.0);

CouplingMatrix dipolar_couplings(const Geometry& geometry,
                                 const FieldOrientation& field, double g = 1.0);

// Same couplings with every pair constant multiplied by factor.
CouplingMatrix scaled_couplings(const CouplingMatrix& couplings, double factor);

// Zeroes every pair not fully contained in keep_sites; matrix size is kept
// so the result still addresses the full system.
CouplingMatrix subsystem_couplings(const CouplingMatrix& couplings,
                                   const std::vector<int>& keep_sites);

PlaneBasis plane_basis(const Geometry& geometry);

OrientationCouplings three_orientation_couplings(const Geometry& geometry,
                                                 double g = 1.0);

}  // namespace spinstore
