#include "spinstore/spin_system.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spinstore {

namespace {

constexpr double kCoincidentTol = 1e-12;
constexpr double kShapeTol = 1e-9;  // relative collinearity / coplanarity slack

void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

double max_extent(const std::vector<SpinSite>& sites) {
  double extent = 0.0;
  for (const auto& s : sites)
    extent = std::max(extent, (s.position - sites.front().position).norm());
  return extent;
}

}  // namespace

Dimensionality classify_sites(const std::vector<SpinSite>& sites) {
  const int n = static_cast<int>(sites.size());
  if (n <= 2) return Dimensionality::Chain;

  const double scale = std::max(1.0, max_extent(sites));
  const Eigen::Vector3d origin = sites[0].position;

  Eigen::Vector3d axis = Eigen::Vector3d::Zero();
  for (int k = 1; k < n && axis.isZero(); ++k) {
    const Eigen::Vector3d r = sites[k].position - origin;
    if (r.norm() > kShapeTol * scale) axis = r.normalized();
  }
  if (axis.isZero()) return Dimensionality::Chain;

  Eigen::Vector3d normal = Eigen::Vector3d::Zero();
  for (int k = 1; k < n; ++k) {
    const Eigen::Vector3d r = sites[k].position - origin;
    if (axis.cross(r).norm() > kShapeTol * scale) {
      normal = axis.cross(r).normalized();
      break;
    }
  }
  if (normal.isZero()) return Dimensionality::Chain;

  for (int k = 1; k < n; ++k) {
    const Eigen::Vector3d r = sites[k].position - origin;
    if (std::abs(normal.dot(r)) > kShapeTol * scale) return Dimensionality::General;
  }
  return Dimensionality::Planar;
}

Geometry make_geometry(std::vector<SpinSite> sites) {
  require(!sites.empty(), "geometry needs at least one site");
  for (const auto& s : sites) {
    require(s.position.allFinite(), "site position must be finite");
    require(std::isfinite(s.gamma) && s.gamma > 0.0, "site gamma must be positive");
  }
  const int n = static_cast<int>(sites.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      require((sites[j].position - sites[i].position).norm() > kCoincidentTol,
              "sites " + std::to_string(i) + " and " + std::to_string(j) +
                  " coincide");

  Geometry geometry;
  geometry.tag = classify_sites(sites);
  geometry.sites = std::move(sites);
  return geometry;
}

Geometry build_chain(int n_sites, double spacing) {
  require(n_sites >= 1, "chain needs at least one site");
  require(std::isfinite(spacing) && spacing > 0.0, "chain spacing must be positive");
  std::vector<SpinSite> sites(n_sites);
  for (int k = 0; k < n_sites; ++k)
    sites[k].position = Eigen::Vector3d(k * spacing, 0.0, 0.0);
  return make_geometry(std::move(sites));
}

Geometry build_lattice(int rows, int cols, double spacing) {
  require(rows >= 1 && cols >= 1, "lattice needs positive rows and cols");
  require(std::isfinite(spacing) && spacing > 0.0, "lattice spacing must be positive");
  std::vector<SpinSite> sites(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      sites[static_cast<std::size_t>(r) * cols + c].position =
          Eigen::Vector3d(c * spacing, r * spacing, 0.0);
  return make_geometry(std::move(sites));
}

FieldOrientation field_along(const Eigen::Vector3d& direction) {
  require(direction.allFinite(), "field direction must be finite");
  const double norm = direction.norm();
  require(norm > kCoincidentTol, "field direction must be nonzero");
  return FieldOrientation{direction / norm};
}

CouplingMatrix make_couplings(Eigen::MatrixXd values, double g) {
  require(values.rows() == values.cols(), "coupling matrix must be square");
  require(values.rows() >= 1, "coupling matrix must be nonempty");
  require(values.allFinite(), "coupling values must be finite");
  require(std::isfinite(g), "coupling prefactor must be finite");
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  require((values - values.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
          "coupling matrix must be symmetric");
  require(values.diagonal().cwiseAbs().maxCoeff() <= 1e-12 * scale,
          "coupling matrix must have a zero diagonal");

  CouplingMatrix couplings;
  couplings.g = g;
  couplings.hetero =
      Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(
          values.rows(), values.cols(), false);
  couplings.values = std::move(values);
  return couplings;
}

CouplingMatrix dipolar_couplings(const Geometry& geometry,
                                 const FieldOrientation& field, double g) {
  const int n = geometry.size();
  require(n >= 1, "geometry must be nonempty");
  require(std::isfinite(g), "coupling prefactor must be finite");
  const Eigen::Vector3d direction = field_along(field.direction).direction;

  CouplingMatrix couplings;
  couplings.g = g;
  couplings.values = Eigen::MatrixXd::Zero(n, n);
  couplings.hetero =
      Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, false);

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Eigen::Vector3d r = geometry.sites[j].position - geometry.sites[i].position;
      const double dist = r.norm();
      require(dist > kCoincidentTol, "sites " + std::to_string(i) + " and " +
                                         std::to_string(j) + " coincide");
      const double cosine = r.dot(direction) / dist;
      const double gi = geometry.sites[i].gamma;
      const double gj = geometry.sites[j].gamma;
      const double value =
          g * gi * gj * (1.0 - 3.0 * cosine * cosine) / (dist * dist * dist);
      couplings.values(i, j) = value;
      couplings.values(j, i) = value;
      const bool hetero = std::abs(gi - gj) > 1e-12 * (1.0 + std::abs(gi) + std::abs(gj));
      couplings.hetero(i, j) = hetero;
      couplings.hetero(j, i) = hetero;
    }
  }
  return couplings;
}

CouplingMatrix scaled_couplings(const CouplingMatrix& couplings, double factor) {
  require(std::isfinite(factor), "coupling scale factor must be finite");
  CouplingMatrix scaled = couplings;
  scaled.values *= factor;
  return scaled;
}

CouplingMatrix subsystem_couplings(const CouplingMatrix& couplings,
                                   const std::vector<int>& keep_sites) {
  const int n = couplings.size();
  std::vector<bool> keep(n, false);
  for (int site : keep_sites) {
    require(site >= 0 && site < n, "subsystem site index out of range");
    keep[site] = true;
  }
  CouplingMatrix restricted = couplings;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!keep[i] || !keep[j]) {
        restricted.values(i, j) = 0.0;
        restricted.hetero(i, j) = false;
      }
    }
  }
  return restricted;
}

PlaneBasis plane_basis(const Geometry& geometry) {
  const int n = geometry.size();
  require(n >= 1, "geometry must be nonempty");

  PlaneBasis basis{Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(),
                   Eigen::Vector3d::UnitZ()};
  if (n == 1) return basis;

  const double scale = std::max(1.0, max_extent(geometry.sites));
  const Eigen::Vector3d origin = geometry.sites[0].position;

  Eigen::Vector3d e1 = Eigen::Vector3d::Zero();
  for (int k = 1; k < n && e1.isZero(); ++k) {
    const Eigen::Vector3d r = geometry.sites[k].position - origin;
    if (r.norm() > kCoincidentTol) e1 = r.normalized();
  }
  require(!e1.isZero(), "geometry has no extent");

  Eigen::Vector3d normal = Eigen::Vector3d::Zero();
  for (int k = 1; k < n; ++k) {
    const Eigen::Vector3d r = geometry.sites[k].position - origin;
    if (e1.cross(r).norm() > kShapeTol * scale) {
      normal = e1.cross(r).normalized();
      break;
    }
  }
  if (normal.isZero()) {
    // Collinear: treat as a degenerate plane with an axis-aligned e2.
    const Eigen::Vector3d helper = std::abs(e1.z()) < 0.9
                                       ? Eigen::Vector3d::UnitZ()
                                       : Eigen::Vector3d::UnitY();
    const Eigen::Vector3d e2 = (helper - helper.dot(e1) * e1).normalized();
    return PlaneBasis{e1, e2, e1.cross(e2)};
  }

  for (int k = 1; k < n; ++k) {
    const Eigen::Vector3d r = geometry.sites[k].position - origin;
    require(std::abs(normal.dot(r)) <= kShapeTol * scale,
            "sites are not coplanar");
  }
  return PlaneBasis{e1, normal.cross(e1), normal};
}

OrientationCouplings three_orientation_couplings(const Geometry& geometry,
                                                 double g) {
  const PlaneBasis basis = plane_basis(geometry);
  return OrientationCouplings{
      dipolar_couplings(geometry, FieldOrientation{basis.e1}, g),
      dipolar_couplings(geometry, FieldOrientation{basis.e2}, g),
      dipolar_couplings(geometry, FieldOrientation{basis.normal}, g),
  };
}

}  // namespace spinstore
