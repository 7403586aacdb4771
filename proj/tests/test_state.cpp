#include <doctest.h>

#include <cmath>

#include "qpmforge/state.hpp"
#include "test_helpers.hpp"

using namespace qpmforge;
using qpmforge::testing::random_symmetric;

namespace {

SqueezeMatrix matrix_from(const std::vector<int>& labels, const Eigen::MatrixXcd& values,
                          double scale = 1.0) {
  SqueezeMatrix gamma;
  gamma.labels = labels;
  gamma.values = values;
  gamma.scale = scale;
  return gamma;
}

SqueezeMatrix single_mode(double r) {
  Eigen::MatrixXcd v(1, 1);
  v << r;
  return matrix_from({0}, v);
}

SqueezeMatrix two_mode(double r) {
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(2, 2);
  v(0, 1) = v(1, 0) = r;
  return matrix_from({0, 1}, v);
}

}  // namespace

TEST_CASE("Takagi factorization") {
  SUBCASE("random symmetric matrices factor to 1e-10") {
    for (unsigned seed : {11u, 29u, 47u, 101u}) {
      const Eigen::MatrixXcd gamma = random_symmetric(8, seed);
      const TakagiResult takagi = takagi_factorize(gamma);
      const Eigen::MatrixXcd rebuilt = takagi.unitary *
                                       takagi.magnitudes.asDiagonal() *
                                       takagi.unitary.transpose();
      CHECK((rebuilt - gamma).norm() < 1e-10);
      CHECK((takagi.unitary.adjoint() * takagi.unitary -
             Eigen::MatrixXcd::Identity(8, 8)).norm() < 1e-12);
      for (int k = 1; k < takagi.magnitudes.size(); ++k)
        CHECK(takagi.magnitudes(k) <= takagi.magnitudes(k - 1) + 1e-15);
      CHECK(takagi.magnitudes.minCoeff() >= 0.0);
    }
  }

  SUBCASE("exactly degenerate two-mode block") {
    const TakagiResult takagi = takagi_factorize(two_mode(0.7).values);
    CHECK(takagi.magnitudes(0) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(takagi.magnitudes(1) == doctest::Approx(0.7).epsilon(1e-12));
    const Eigen::MatrixXcd rebuilt = takagi.unitary * takagi.magnitudes.asDiagonal() *
                                     takagi.unitary.transpose();
    CHECK((rebuilt - two_mode(0.7).values).norm() < 1e-12);
  }

  SUBCASE("zero and rank-deficient matrices") {
    const TakagiResult zero = takagi_factorize(Eigen::MatrixXcd::Zero(4, 4));
    CHECK(zero.magnitudes.maxCoeff() == 0.0);
    CHECK((zero.unitary.adjoint() * zero.unitary - Eigen::MatrixXcd::Identity(4, 4)).norm() <
          1e-12);

    Eigen::VectorXcd u(3);
    u << complexd{0.6, 0.2}, complexd{0.0, -0.5}, complexd{0.3, 0.4};
    const Eigen::MatrixXcd rank1 = u * u.transpose();
    const TakagiResult takagi = takagi_factorize(rank1);
    CHECK(takagi.magnitudes(0) == doctest::Approx(u.squaredNorm()).epsilon(1e-12));
    CHECK(takagi.magnitudes(1) == doctest::Approx(0.0).epsilon(1e-12));
    const Eigen::MatrixXcd rebuilt = takagi.unitary * takagi.magnitudes.asDiagonal() *
                                     takagi.unitary.transpose();
    CHECK((rebuilt - rank1).norm() < 1e-12);
  }

  SUBCASE("squeeze magnitudes are invariant under a global phase") {
    const Eigen::MatrixXcd gamma = random_symmetric(6, 77u);
    const TakagiResult a = takagi_factorize(gamma);
    const TakagiResult b = takagi_factorize(std::polar(1.0, 0.83) * gamma);
    CHECK((a.magnitudes - b.magnitudes).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("non-symmetric input is rejected") {
    Eigen::MatrixXcd bad = random_symmetric(3, 5u);
    bad(0, 1) += 1e-3;
    CHECK_THROWS_AS(takagi_factorize(bad), std::invalid_argument);
  }
}

TEST_CASE("covariance of elementary squeezed states") {
  SUBCASE("single mode: positive real entry squeezes p") {
    for (double r : {0.1, 0.5, 1.0}) {
      const CovarianceState state =
          covariance_from_squeeze(single_mode(r), SqueezePairing::SinglePolarization);
      CHECK(state.covariance(0, 0) == doctest::Approx(0.5 * std::exp(2.0 * r)).epsilon(1e-12));
      CHECK(state.covariance(1, 1) == doctest::Approx(0.5 * std::exp(-2.0 * r)).epsilon(1e-12));
      CHECK(purity_determinant(state) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  SUBCASE("two-mode entry squeezes x- and p+") {
    for (double r : {0.1, 0.5, 1.0}) {
      const CovarianceState state =
          covariance_from_squeeze(two_mode(r), SqueezePairing::SinglePolarization);
      Eigen::VectorXd xm(4), pp(4), xp(4);
      xm << 1 / std::sqrt(2.0), 0, -1 / std::sqrt(2.0), 0;
      pp << 0, 1 / std::sqrt(2.0), 0, 1 / std::sqrt(2.0);
      xp << 1 / std::sqrt(2.0), 0, 1 / std::sqrt(2.0), 0;
      CHECK(quadrature_variance(state, xm) ==
            doctest::Approx(0.5 * std::exp(-2.0 * r)).epsilon(1e-12));
      CHECK(quadrature_variance(state, pp) ==
            doctest::Approx(0.5 * std::exp(-2.0 * r)).epsilon(1e-12));
      CHECK(quadrature_variance(state, xp) ==
            doctest::Approx(0.5 * std::exp(2.0 * r)).epsilon(1e-12));
    }
  }

  SUBCASE("scale multiplies the entries") {
    SqueezeMatrix gamma = single_mode(0.25);
    gamma.scale = 2.0;
    const CovarianceState state =
        covariance_from_squeeze(gamma, SqueezePairing::SinglePolarization);
    CHECK(state.covariance(1, 1) == doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-12));
  }

  SUBCASE("physicality of random squeezed states") {
    for (unsigned seed : {3u, 13u, 31u}) {
      const SqueezeMatrix gamma =
          matrix_from({0, 1, 2, 3, 4}, random_symmetric(5, seed, 0.3));
      const CovarianceState state =
          covariance_from_squeeze(gamma, SqueezePairing::SinglePolarization);
      CHECK(purity_determinant(state) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(min_uncertainty_eigenvalue(state) > -1e-9);
    }
  }

  SUBCASE("mode permutation conjugates the covariance") {
    const Eigen::MatrixXcd values = random_symmetric(4, 57u, 0.3);
    const std::vector<int> perm = {2, 0, 3, 1};  // new order of old indices
    Eigen::MatrixXcd permuted(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) permuted(i, j) = values(perm[i], perm[j]);
    const CovarianceState a =
        covariance_from_squeeze(matrix_from({0, 1, 2, 3}, values), SqueezePairing::SinglePolarization);
    const CovarianceState b = covariance_from_squeeze(matrix_from({0, 1, 2, 3}, permuted),
                                                      SqueezePairing::SinglePolarization);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int qi = 0; qi < 2; ++qi)
          for (int qj = 0; qj < 2; ++qj)
            CHECK(b.covariance(2 * i + qi, 2 * j + qj) ==
                  doctest::Approx(a.covariance(2 * perm[static_cast<std::size_t>(i)] + qi,
                                               2 * perm[static_cast<std::size_t>(j)] + qj))
                      .epsilon(1e-12));
  }

  SUBCASE("cross-polarized pairing doubles the registry") {
    const CovarianceState state =
        covariance_from_squeeze(single_mode(0.4), SqueezePairing::CrossPolarized);
    REQUIRE(state.mode_count() == 2);
    CHECK(state.modes[0].pol == Polarization::Horizontal);
    CHECK(state.modes[1].pol == Polarization::Vertical);
    // the H/V pair is two-mode squeezed: x_H - x_V squeezed
    Eigen::VectorXd xm(4);
    xm << 1 / std::sqrt(2.0), 0, -1 / std::sqrt(2.0), 0;
    CHECK(quadrature_variance(state, xm) ==
          doctest::Approx(0.5 * std::exp(-0.8)).epsilon(1e-12));
  }

  SUBCASE("asymmetric matrices are rejected") {
    Eigen::MatrixXcd bad = Eigen::MatrixXcd::Zero(2, 2);
    bad(0, 1) = 0.3;
    CHECK_THROWS_AS(covariance_from_squeeze(matrix_from({0, 1}, bad),
                                            SqueezePairing::SinglePolarization),
                    std::invalid_argument);
  }
}

TEST_CASE("linear optical elements") {
  const CovarianceState vac = vacuum_state({{0, Polarization::Horizontal, 1},
                                            {0, Polarization::Vertical, 1},
                                            {0, Polarization::Horizontal, 2},
                                            {0, Polarization::Vertical, 2}});

  SUBCASE("every element is symplectic and preserves vacuum") {
    const std::vector<LinearOpticalElement> elements = {
        {LinearOpticalElement::Kind::PolarizingBeamSplitter, 0.0, 1, 2},
        {LinearOpticalElement::Kind::HalfWavePlate, 45.0, 2, 2},
        {LinearOpticalElement::Kind::BeamSplitter, 0.0, 1, 2}};
    for (const auto& element : elements) {
      const Eigen::MatrixXd s = element_symplectic(vac, element);
      CHECK(is_symplectic(s, 1e-12));
      const CovarianceState out = apply_element(vac, element);
      CHECK((out.covariance - vac.covariance).cwiseAbs().maxCoeff() < 1e-15);
    }
  }

  SUBCASE("half-wave plate applied twice restores the covariance") {
    SqueezeMatrix gamma = single_mode(0.6);
    CovarianceState state = covariance_from_squeeze(gamma, SqueezePairing::CrossPolarized);
    const LinearOpticalElement hwp{LinearOpticalElement::Kind::HalfWavePlate, 45.0, 1, 1};
    const CovarianceState once = apply_element(state, hwp);
    CHECK(purity_determinant(once) == doctest::Approx(1.0).epsilon(1e-9));
    const CovarianceState twice = apply_element(once, hwp);
    CHECK((twice.covariance - state.covariance).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("balanced splitter fixes two identically squeezed inputs") {
    // direct 4x4 oracle: S (V0 ⊕ V0) S^T = V0 ⊕ V0 for any single-mode V0
    CovarianceState state = vacuum_state({{0, Polarization::None, 1},
                                          {0, Polarization::None, 2}});
    Eigen::Matrix2d v0;
    v0 << 0.5 * std::exp(0.8), 0.0, 0.0, 0.5 * std::exp(-0.8);
    state.covariance.block<2, 2>(0, 0) = v0;
    state.covariance.block<2, 2>(2, 2) = v0;
    const CovarianceState out =
        apply_element(state, {LinearOpticalElement::Kind::BeamSplitter, 0.0, 1, 2});
    CHECK((out.covariance - state.covariance).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("missing paths are reported") {
    CHECK_THROWS_AS(apply_element(vac, {LinearOpticalElement::Kind::BeamSplitter, 0.0, 1, 7}),
                    std::invalid_argument);
    CHECK_THROWS_AS(apply_element(vac, {LinearOpticalElement::Kind::HalfWavePlate, 45.0, 9, 9}),
                    std::invalid_argument);
  }
}

TEST_CASE("polarization elimination") {
  SUBCASE("vacuum in, vacuum out") {
    Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(2, 2);
    const CovarianceState state =
        covariance_from_squeeze(matrix_from({0, 1}, zero), SqueezePairing::CrossPolarized);
    const CovarianceState out = eliminate_polarization(state);
    CHECK((out.covariance -
           0.5 * Eigen::MatrixXd::Identity(out.covariance.rows(), out.covariance.cols()))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  }

  SUBCASE("single term splits into opposite-sign copies") {
    const double r = 0.5;
    const CovarianceState in =
        covariance_from_squeeze(single_mode(r), SqueezePairing::CrossPolarized);
    const CovarianceState out = eliminate_polarization(in);
    REQUIRE(out.mode_count() == 2);

    const CovarianceState plus =
        covariance_from_squeeze(single_mode(r), SqueezePairing::SinglePolarization);
    const CovarianceState minus =
        covariance_from_squeeze(single_mode(-r), SqueezePairing::SinglePolarization);

    const Eigen::Matrix2d block1 = out.covariance.block<2, 2>(0, 0);
    const Eigen::Matrix2d block2 = out.covariance.block<2, 2>(2, 2);
    const Eigen::Matrix2d cross = out.covariance.block<2, 2>(0, 2);
    CHECK(cross.cwiseAbs().maxCoeff() < 1e-12);
    const bool direct = (block1 - plus.covariance).cwiseAbs().maxCoeff() < 1e-9 &&
                        (block2 - minus.covariance).cwiseAbs().maxCoeff() < 1e-9;
    const bool swapped = (block1 - minus.covariance).cwiseAbs().maxCoeff() < 1e-9 &&
                         (block2 - plus.covariance).cwiseAbs().maxCoeff() < 1e-9;
    CHECK((direct || swapped));
  }

  SUBCASE("multi-mode cross-block correlations vanish") {
    const SqueezeMatrix gamma = matrix_from({0, 1, 2}, random_symmetric(3, 91u, 0.3));
    const CovarianceState out =
        eliminate_polarization(covariance_from_squeeze(gamma, SqueezePairing::CrossPolarized));
    REQUIRE(out.mode_count() == 6);
    double cross = 0.0;
    for (std::size_t a = 0; a < 6; ++a)
      for (std::size_t b = 0; b < 6; ++b) {
        if (out.modes[a].path == out.modes[b].path) continue;
        cross = std::max(cross, out.covariance.block<2, 2>(2 * static_cast<long>(a),
                                                           2 * static_cast<long>(b))
                                    .cwiseAbs()
                                    .maxCoeff());
      }
    CHECK(cross < 1e-12);
  }

  SUBCASE("wrong pairing is rejected") {
    const CovarianceState single =
        covariance_from_squeeze(single_mode(0.3), SqueezePairing::SinglePolarization);
    CHECK_THROWS_AS(eliminate_polarization(single), std::invalid_argument);
  }
}

TEST_CASE("quadrature variance") {
  const CovarianceState vac = vacuum_state({{0, Polarization::None, 1}});
  Eigen::VectorXd d(2);
  d << std::sqrt(0.5), std::sqrt(0.5);
  CHECK(quadrature_variance(vac, d) == doctest::Approx(0.5).epsilon(1e-15));
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(quadrature_variance(vac, zero), std::invalid_argument);
}

TEST_CASE("hybrid squeezed state scan") {
  SUBCASE("all-zero row is vacuum") {
    const auto table = thss_scan({0, 0, 1}, {0, 0, 1}, {0, 0, 1});
    REQUIRE(table.size() == 1);
    CHECK(table[0].var_x1 == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(table[0].var_xminus == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(table[0].ptse == doctest::Approx(0.5).epsilon(1e-9));
  }

  SUBCASE("pure two-mode line: entanglement proxy equals e^{-2 b12}/2") {
    const auto table = thss_scan({0, 0, 1}, {0.1, 0.9, 5}, {0, 0, 1});
    for (const ThssPoint& p : table) {
      CHECK(p.ptse == doctest::Approx(0.5 * std::exp(-2.0 * p.b12)).epsilon(1e-9));
      CHECK(p.var_xminus == doctest::Approx(0.5 * std::exp(-2.0 * p.b12)).epsilon(1e-9));
      CHECK(p.var_pplus == doctest::Approx(0.5 * std::exp(-2.0 * p.b12)).epsilon(1e-9));
    }
  }

  SUBCASE("product line b12 = 0 is never flagged entangled") {
    const auto table = thss_scan({0.0, 0.8, 5}, {0, 0, 1}, {0.0, 0.8, 4});
    for (const ThssPoint& p : table) CHECK(p.ptse >= 0.5 - 1e-9);
  }

  SUBCASE("single-mode limit: mode 1 squeezed, mode 2 vacuum") {
    const auto table = thss_scan({0.7, 0.7, 1}, {0, 0, 1}, {0, 0, 1});
    REQUIRE(table.size() == 1);
    // p squeezed in this convention; x antisqueezed
    CHECK(table[0].var_x1 == doctest::Approx(0.5 * std::exp(1.4)).epsilon(1e-9));
    SqueezeMatrix gamma;
    gamma.labels = {1, 2};
    gamma.values = Eigen::MatrixXcd::Zero(2, 2);
    gamma.values(0, 0) = 0.7;
    const CovarianceState state =
        covariance_from_squeeze(gamma, SqueezePairing::SinglePolarization);
    Eigen::VectorXd p1(4), x2(4), p2(4);
    p1 << 0, 1, 0, 0;
    x2 << 0, 0, 1, 0;
    p2 << 0, 0, 0, 1;
    CHECK(quadrature_variance(state, p1) ==
          doctest::Approx(0.5 * std::exp(-1.4)).epsilon(1e-9));
    CHECK(quadrature_variance(state, x2) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(quadrature_variance(state, p2) == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("purity of reduced blocks") {
  SUBCASE("block-diagonal squeeze matrices reduce to pure blocks") {
    Eigen::MatrixXcd values = Eigen::MatrixXcd::Zero(4, 4);
    values(0, 0) = 0.4;
    values(0, 1) = values(1, 0) = 0.3;
    values(1, 1) = 0.2;
    values(2, 2) = 0.5;
    values(2, 3) = values(3, 2) = 0.25;
    values(3, 3) = 0.1;
    const SqueezeMatrix gamma = matrix_from({0, 1, 2, 3}, values);
    const CovarianceState full =
        covariance_from_squeeze(gamma, SqueezePairing::SinglePolarization);
    const CovarianceState reduced = reduce_state(full, {{0, Polarization::None, 1},
                                                        {1, Polarization::None, 1}});
    CHECK(purity_determinant(reduced) == doctest::Approx(1.0).epsilon(1e-6));
  }

  SUBCASE("coupled blocks lose purity under reduction") {
    Eigen::MatrixXcd values = Eigen::MatrixXcd::Zero(3, 3);
    values(0, 0) = 0.4;
    values(1, 1) = 0.3;
    values(2, 2) = 0.3;
    values(1, 2) = values(2, 1) = 0.4;  // couples kept mode 1 to dropped mode 2
    const SqueezeMatrix gamma = matrix_from({0, 1, 2}, values);
    const CovarianceState full =
        covariance_from_squeeze(gamma, SqueezePairing::SinglePolarization);
    const CovarianceState reduced = reduce_state(full, {{0, Polarization::None, 1},
                                                        {1, Polarization::None, 1}});
    CHECK(purity_determinant(reduced) > 1.0 + 1e-3);
  }
}

TEST_CASE("symplectic representation of mode unitaries") {
  // QR of a random complex matrix gives a unitary
  std::mt19937 rng(123u);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXcd m(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) m(i, j) = {dist(rng), dist(rng)};
  const Eigen::MatrixXcd q = Eigen::HouseholderQR<Eigen::MatrixXcd>(m).householderQ();
  const Eigen::MatrixXd s = symplectic_from_mode_unitary(q);
  CHECK(is_symplectic(s, 1e-12));
  // orthogonal too: passive transformations preserve photon number
  CHECK((s.transpose() * s - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-12);
}
