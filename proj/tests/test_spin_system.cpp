#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "spinstore/spin_system.hpp"

using namespace spinstore;

namespace {

// Small deterministic value stream for property-style checks.
struct ValueStream {
  unsigned long long state;
  explicit ValueStream(unsigned long long seed) : state(seed) {}
  double next() {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(state >> 11) * 0x1p-53;
  }
};

}  // namespace

TEST_CASE("chain couplings against hand-computed values") {
  const Geometry chain = build_chain(3, 1.0);

  SUBCASE("field perpendicular to the chain") {
    const CouplingMatrix c = dipolar_couplings(chain, field_along({0, 0, 1}));
    CHECK(c.values(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(c.values(1, 2) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(c.values(0, 2) == doctest::Approx(0.125).epsilon(1e-14));
  }

  SUBCASE("field parallel to the chain") {
    const CouplingMatrix c = dipolar_couplings(chain, field_along({1, 0, 0}));
    CHECK(c.values(0, 1) == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(c.values(1, 2) == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(c.values(0, 2) == doctest::Approx(-0.25).epsilon(1e-14));
  }

  SUBCASE("gamma factors multiply pairwise") {
    Geometry weighted = chain;
    weighted.sites[0].gamma = 1.0;
    weighted.sites[1].gamma = 3.0;
    weighted.sites[2].gamma = 2.0;
    weighted = make_geometry(weighted.sites);
    const CouplingMatrix c = dipolar_couplings(weighted, field_along({0, 0, 1}));
    CHECK(c.values(0, 1) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(c.values(1, 2) == doctest::Approx(6.0).epsilon(1e-14));
    CHECK(c.values(0, 2) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(c.hetero(0, 1));
    CHECK(c.hetero(1, 2));
    CHECK(c.hetero(0, 2));
  }

  SUBCASE("prefactor g scales everything") {
    const CouplingMatrix c = dipolar_couplings(chain, field_along({0, 0, 1}), 2.5);
    CHECK(c.values(0, 1) == doctest::Approx(2.5).epsilon(1e-14));
  }
}

TEST_CASE("coupling vanishes at the magic angle") {
  std::vector<SpinSite> sites(2);
  sites[1].position = Eigen::Vector3d(std::sqrt(2.0), 0.0, 1.0);  // cos^2 = 1/3
  const Geometry pair = make_geometry(sites);
  const CouplingMatrix c = dipolar_couplings(pair, field_along({0, 0, 1}));
  CHECK(std::abs(c.values(0, 1)) < 1e-15);
}

TEST_CASE("parallel field doubles and flips perpendicular couplings") {
  for (double spacing : {0.5, 1.0, 1.7}) {
    const Geometry chain = build_chain(4, spacing);
    const CouplingMatrix parallel = dipolar_couplings(chain, field_along({1, 0, 0}));
    const CouplingMatrix perpendicular =
        dipolar_couplings(chain, field_along({0, 0, 1}));
    CHECK((parallel.values + 2.0 * perpendicular.values).cwiseAbs().maxCoeff() <
          1e-14);
  }
}

TEST_CASE("orientation couplings for a unit square") {
  const Geometry lattice = build_lattice(2, 2, 1.0);
  const OrientationCouplings o = three_orientation_couplings(lattice);
  const double diag = 1.0 / (2.0 * std::sqrt(2.0));

  // Site order is row-major: 0 and 1 share a row, 0 and 2 share a column.
  CHECK(o.along_e1.values(0, 1) == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(o.along_e1.values(0, 2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(o.along_e1.values(0, 3) == doctest::Approx(-diag / 2.0).epsilon(1e-12));
  CHECK(o.along_e2.values(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(o.along_e2.values(0, 2) == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(o.along_normal.values(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(o.along_normal.values(0, 3) == doctest::Approx(diag).epsilon(1e-12));

  CHECK((o.along_e1.values + o.along_e2.values + o.along_normal.values)
            .cwiseAbs()
            .maxCoeff() < 1e-14);
}

TEST_CASE("orientation couplings sum to zero for scattered planar sites") {
  ValueStream stream(99);
  for (int trial = 0; trial < 4; ++trial) {
    std::vector<SpinSite> sites(5);
    for (auto& site : sites)
      site.position =
          Eigen::Vector3d(3.0 * stream.next(), 3.0 * stream.next(), 0.25);
    const Geometry geometry = make_geometry(sites);
    REQUIRE(geometry.tag == Dimensionality::Planar);

    const OrientationCouplings o = three_orientation_couplings(geometry);
    const double scale =
        std::max(1.0, o.along_e1.values.cwiseAbs().maxCoeff());
    CHECK((o.along_e1.values + o.along_e2.values + o.along_normal.values)
              .cwiseAbs()
              .maxCoeff() < 1e-13 * scale);
    CHECK((o.along_e1.values - o.along_e1.values.transpose()).cwiseAbs().maxCoeff() ==
          0.0);
  }
}

TEST_CASE("plane basis is orthonormal and aligned with the geometry") {
  SUBCASE("lattice") {
    const PlaneBasis basis = plane_basis(build_lattice(2, 3, 0.7));
    CHECK(basis.e1.isApprox(Eigen::Vector3d::UnitX(), 1e-12));
    CHECK(basis.normal.cwiseAbs().isApprox(Eigen::Vector3d::UnitZ(), 1e-12));
    CHECK(std::abs(basis.e1.dot(basis.e2)) < 1e-14);
    CHECK(std::abs(basis.e2.norm() - 1.0) < 1e-14);
  }
  SUBCASE("chain gets a deterministic degenerate plane") {
    const PlaneBasis basis = plane_basis(build_chain(3, 1.0));
    CHECK(basis.e1.isApprox(Eigen::Vector3d::UnitX(), 1e-12));
    CHECK(std::abs(basis.e1.dot(basis.e2)) < 1e-14);
    CHECK(std::abs(basis.normal.norm() - 1.0) < 1e-14);
  }
}

TEST_CASE("geometry classification") {
  CHECK(build_chain(5, 1.0).tag == Dimensionality::Chain);
  CHECK(build_lattice(2, 3, 1.0).tag == Dimensionality::Planar);
  CHECK(build_lattice(1, 4, 1.0).tag == Dimensionality::Chain);

  std::vector<SpinSite> tetra(4);
  tetra[1].position = Eigen::Vector3d(1, 0, 0);
  tetra[2].position = Eigen::Vector3d(0, 1, 0);
  tetra[3].position = Eigen::Vector3d(0, 0, 1);
  CHECK(make_geometry(tetra).tag == Dimensionality::General);
}

TEST_CASE("subsystem restriction zeroes cross couplings") {
  const CouplingMatrix c =
      dipolar_couplings(build_chain(4, 1.0), field_along({0, 0, 1}));
  const CouplingMatrix held = subsystem_couplings(c, {2, 3});
  CHECK(held.values(2, 3) == c.values(2, 3));
  CHECK(held.values(0, 1) == 0.0);
  CHECK(held.values(1, 2) == 0.0);
  CHECK(held.values(0, 3) == 0.0);
}

TEST_CASE("coupling scaling") {
  const CouplingMatrix c =
      dipolar_couplings(build_chain(3, 1.0), field_along({0, 0, 1}));
  const CouplingMatrix doubled = scaled_couplings(c, -2.0);
  CHECK((doubled.values + 2.0 * c.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("geometry and coupling validation") {
  CHECK_THROWS_AS(build_chain(0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_chain(3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_lattice(0, 2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(field_along(Eigen::Vector3d::Zero()), std::invalid_argument);

  std::vector<SpinSite> coincident(2);
  CHECK_THROWS_AS(make_geometry(coincident), std::invalid_argument);

  std::vector<SpinSite> bad_gamma(2);
  bad_gamma[1].position = Eigen::Vector3d(1, 0, 0);
  bad_gamma[1].gamma = -1.0;
  CHECK_THROWS_AS(make_geometry(bad_gamma), std::invalid_argument);

  CHECK_THROWS_AS(make_couplings(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);

  Eigen::MatrixXd asymmetric = Eigen::MatrixXd::Zero(2, 2);
  asymmetric(0, 1) = 1.0;
  CHECK_THROWS_AS(make_couplings(asymmetric), std::invalid_argument);

  Eigen::MatrixXd diagonal = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(make_couplings(diagonal), std::invalid_argument);

  const CouplingMatrix c =
      dipolar_couplings(build_chain(3, 1.0), field_along({0, 0, 1}));
  CHECK_THROWS_AS(subsystem_couplings(c, {0, 5}), std::invalid_argument);

  std::vector<SpinSite> bent(4);
  bent[1].position = Eigen::Vector3d(1, 0, 0);
  bent[2].position = Eigen::Vector3d(0, 1, 0);
  bent[3].position = Eigen::Vector3d(0, 0, 1);
  CHECK_THROWS_AS(plane_basis(make_geometry(bent)), std::invalid_argument);
}
