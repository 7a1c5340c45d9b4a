#include "incompat/quantum.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace incompat;

namespace {

using cd = std::complex<double>;

ComplexMatrix mat2(cd a, cd b, cd c, cd d) {
  ComplexMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Projector diag10() { return Projector::from_matrix(mat2(1, 0, 0, 0)); }
Projector diag01() { return Projector::from_matrix(mat2(0, 0, 0, 1)); }
Projector half() { return Projector::from_matrix(mat2(0.5, 0.5, 0.5, 0.5)); }

ComplexVector basis(int dim, int i) {
  ComplexVector v = ComplexVector::Zero(dim);
  v(i) = 1;
  return v;
}

void check_density(const DensityOp& rho, double tol) {
  const ComplexMatrix& m = rho.matrix();
  CHECK((m - m.adjoint()).norm() <= tol);
  CHECK(std::abs(m.trace() - cd(1)) <= tol);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
  CHECK(es.eigenvalues().minCoeff() >= -tol);
}

void check_projector(const Projector& p, double tol) {
  const ComplexMatrix& m = p.matrix();
  CHECK((m - m.adjoint()).norm() <= tol);
  CHECK((m * m - m).norm() <= tol);
  CHECK(std::abs(m.trace().real() - p.rank()) <= tol);
}

}  // namespace

TEST_SUITE("quantum") {

TEST_CASE("projectors from spanning vectors") {
  const ComplexVector e1 = basis(2, 0), e2 = basis(2, 1);
  const ComplexVector one[] = {e1};
  CHECK(make_projector(one).matrix().isApprox(mat2(1, 0, 0, 0)));
  CHECK(make_projector(one).rank() == 1);

  const ComplexVector both[] = {e1, e2};
  CHECK(make_projector(both).matrix().isApprox(ComplexMatrix::Identity(2, 2)));
  CHECK(make_projector(both).rank() == 2);

  ComplexVector d(2);
  d << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  const ComplexVector diagonal[] = {d};
  CHECK((make_projector(diagonal).matrix() - mat2(0.5, 0.5, 0.5, 0.5)).norm() < 1e-14);
}

TEST_CASE("dependent vectors are rejected") {
  const ComplexVector e1 = basis(3, 0);
  const ComplexVector twice[] = {e1, cd(0, 2) * e1};
  CHECK_THROWS_AS(make_projector(twice), RankDeficient);
  const ComplexVector zero[] = {ComplexVector::Zero(3)};
  CHECK_THROWS_AS(make_projector(zero), RankDeficient);
}

TEST_CASE("invalid operators are rejected") {
  CHECK_THROWS_AS(Projector::from_matrix(mat2(1, 1, 0, 0)), ValidationError);
  CHECK_THROWS_AS(Projector::from_matrix(mat2(0.5, 0, 0, 0)), ValidationError);
  CHECK_THROWS_AS(DensityOp::from_matrix(mat2(1, 0, 0, 1)), ValidationError);
  CHECK_THROWS_AS(DensityOp::from_matrix(mat2(1.5, 0, 0, -0.5)), ValidationError);
  CHECK_THROWS_AS(DensityOp::from_matrix(mat2(0.5, 1, 0, 0.5)), ValidationError);
  CHECK_THROWS_AS(ProjectorFamily({diag10(), half()}), ValidationError);
  CHECK_THROWS_AS(ProjectorFamily({diag10()}), ValidationError);
  CHECK_NOTHROW(ProjectorFamily({diag10(), diag01()}));
}

TEST_CASE("Lueders conditioning") {
  const auto mixed = DensityOp::from_matrix(mat2(0.5, 0, 0, 0.5));
  CHECK(lueders_condition(mixed, diag10()).matrix().isApprox(mat2(1, 0, 0, 0)));

  const auto inside = DensityOp::from_matrix(mat2(1, 0, 0, 0));
  CHECK(lueders_condition(inside, diag10()).matrix().isApprox(inside.matrix()));

  const auto identity = Projector::from_matrix(ComplexMatrix::Identity(2, 2));
  const auto rho = DensityOp::from_matrix(mat2(0.7, cd(0.1, 0.2), cd(0.1, -0.2), 0.3));
  CHECK(lueders_condition(rho, identity).matrix().isApprox(rho.matrix()));

  CHECK_THROWS_AS(lueders_condition(inside, diag01()), ZeroCondition);
}

TEST_CASE("Lueders output is a density operator") {
  std::mt19937_64 rng(3);
  for (int dim = 2; dim <= 6; ++dim) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto [p, q] = gen_pair(dim, PairMode::Generic, {1 + static_cast<int>(seed % (dim - 1)), 1}, seed);
      const auto rho = random_pure_state(dim, rng);
      check_density(lueders_condition(rho, p), 1e-12);
    }
  }
}

TEST_CASE("sequential probabilities") {
  const auto rho = DensityOp::from_matrix(mat2(1, 0, 0, 0));
  const Projector pq[] = {diag10(), half()}, qp[] = {half(), diag10()};
  CHECK(seq_prob_q(rho, pq) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(seq_prob_q(rho, qp) == doctest::Approx(0.25).epsilon(1e-12));

  const auto identity = Projector::from_matrix(ComplexMatrix::Identity(3, 3));
  std::mt19937_64 rng(1);
  const Projector ii[] = {identity, identity};
  CHECK(seq_prob_q(random_pure_state(3, rng), ii) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(seq_prob_q(random_pure_state(3, rng), pq), DimensionMismatch);
}

TEST_CASE("summing over a complete family recovers the prefix") {
  std::mt19937_64 rng(8);
  for (int dim = 2; dim <= 6; ++dim) {
    const auto [p, q] = gen_pair(dim, PairMode::Generic, {1, dim - 1}, 77 + dim);
    const auto fam = ProjectorFamily::binary(q);
    const auto rho = random_pure_state(dim, rng);
    const Projector prefix[] = {p};
    double sum = 0;
    for (const auto& member : fam.members()) {
      const Projector path[] = {p, member};
      sum += seq_prob_q(rho, path);
    }
    CHECK(std::abs(sum - seq_prob_q(rho, prefix)) <= 1e-12);
  }
}

TEST_CASE("commutator defect") {
  CHECK(commutator_defect(diag10(), diag01()) == 0.0);
  CHECK(std::abs(commutator_defect(diag10(), half()) - 1 / std::sqrt(2.0)) <= 1e-12);
  const auto identity = Projector::from_matrix(ComplexMatrix::Identity(2, 2));
  CHECK(commutator_defect(half(), identity) == 0.0);
  CHECK_THROWS_AS(commutator_defect(diag10(), Projector::from_matrix(ComplexMatrix::Identity(3, 3))),
                  DimensionMismatch);
}

TEST_CASE("order-exchange identity on the 2x2 example") {
  const auto r = criterion_identity_check(CriterionKind::OrderExchange, diag10(), half());
  CHECK_FALSE(r.holds);
  const ComplexMatrix pqp = diag10().matrix() * half().matrix() * diag10().matrix();
  const ComplexMatrix qpq = half().matrix() * diag10().matrix() * half().matrix();
  CHECK((pqp - mat2(0.5, 0, 0, 0)).norm() < 1e-15);
  CHECK((qpq - mat2(0.25, 0.25, 0.25, 0.25)).norm() < 1e-15);
  CHECK(std::abs(r.defect - (pqp - qpq).norm()) < 1e-15);
}

TEST_CASE("ignored identity on the 2x2 example") {
  // sum_s Q_s P Q_s with Q_s in {Q, 1-Q} is I/2, against P = diag(1, 0).
  const auto r = criterion_identity_check(CriterionKind::IgnoredMeasurement, diag10(),
                                          ProjectorFamily::binary(half()));
  CHECK_FALSE(r.holds);
  CHECK(r.defect > 0.1);
  CHECK(std::abs(r.defect - 1 / std::sqrt(2.0)) < 1e-12);

  const ProjectorFamily basis_family({diag10(), diag01()});
  CHECK_THROWS_AS(criterion_identity_check(CriterionKind::IgnoredMeasurement, basis_family, half()),
                  ShapeMismatch);
}

TEST_CASE("nondisturbance identity on the 2x2 example") {
  const ProjectorFamily basis_family({diag10(), diag01()});
  const auto r = criterion_identity_check(CriterionKind::NonDisturbance, basis_family, half());
  CHECK_FALSE(r.holds);
  CHECK(r.defect > 0.1);
  CHECK(criterion_identity_check(CriterionKind::NonDisturbance, basis_family, diag10()).holds);
  CHECK_THROWS_AS(criterion_identity_check(CriterionKind::NonDisturbance, diag10(), half()), ShapeMismatch);
  CHECK_THROWS_AS(criterion_identity_check(CriterionKind::OrderExchange, basis_family, half()), ShapeMismatch);
}

TEST_CASE("identities hold for commuting pairs") {
  for (int dim = 2; dim <= 6; ++dim) {
    for (int r = 1; r < dim; ++r) {
      const auto [p, q] = gen_pair(dim, PairMode::Commuting, {r, dim - r}, 1000 * dim + r);
      CHECK(commutator_defect(p, q) <= 1e-10);
      const auto oe = criterion_identity_check(CriterionKind::OrderExchange, p, q);
      const auto ig = criterion_identity_check(CriterionKind::IgnoredMeasurement, p, ProjectorFamily::binary(q));
      const auto nd = criterion_identity_check(CriterionKind::NonDisturbance, ProjectorFamily::binary(p), q);
      CHECK(oe.holds);
      CHECK(ig.holds);
      CHECK(nd.holds);
      CHECK(oe.defect <= 1e-12);
      CHECK(ig.defect <= 1e-12);
      CHECK(nd.defect <= 1e-12);
    }
  }
}

TEST_CASE("generated pairs") {
  for (int dim = 2; dim <= 6; ++dim) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const int rp = 1 + static_cast<int>(seed % (dim - 1)), rq = 1 + static_cast<int>((seed / 2) % (dim - 1));
      const auto [cp, cq] = gen_pair(dim, PairMode::Commuting, {rp, rq}, seed);
      const auto [gp, gq] = gen_pair(dim, PairMode::Generic, {rp, rq}, seed);
      CHECK(cp.rank() == rp);
      CHECK(cq.rank() == rq);
      CHECK(gp.rank() == rp);
      CHECK(gq.rank() == rq);
      CHECK(commutator_defect(cp, cq) <= 1e-10);
      CHECK(commutator_defect(gp, gq) > 1e-6);
      for (const auto* p : {&cp, &cq, &gp, &gq}) check_projector(*p, 1e-12);
    }
  }
  const auto [a1, b1] = gen_pair(4, PairMode::Generic, {2, 1}, 99);
  const auto [a2, b2] = gen_pair(4, PairMode::Generic, {2, 1}, 99);
  CHECK(a1.matrix() == a2.matrix());
  CHECK(b1.matrix() == b2.matrix());
}

TEST_CASE("single-pair nondisturbance form matches commutativity") {
  for (int dim = 2; dim <= 6; ++dim) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      for (auto mode : {PairMode::Commuting, PairMode::Generic}) {
        const auto [p, q] = gen_pair(dim, mode, {1, dim - 1}, seed);
        const bool commutes = commutator_defect(p, q) <= kIdentityTolerance;
        CHECK(single_pair_nondisturbance_check(p, q).holds == commutes);
      }
    }
  }
}

TEST_CASE("spanning density set") {
  for (int dim = 2; dim <= 6; ++dim) {
    const auto set = spanning_density_set(dim);
    REQUIRE(set.size() == static_cast<std::size_t>(dim * dim));
    // Real coordinates of each Hermitian matrix: diagonal, then Re and Im of
    // the upper triangle.
    Eigen::MatrixXd coords(dim * dim, set.size());
    for (std::size_t k = 0; k < set.size(); ++k) {
      check_density(set[k], 1e-12);
      const auto& m = set[k].matrix();
      int row = 0;
      for (int i = 0; i < dim; ++i) coords(row++, k) = m(i, i).real();
      for (int i = 0; i < dim; ++i) {
        for (int j = i + 1; j < dim; ++j) {
          coords(row++, k) = m(i, j).real();
          coords(row++, k) = m(i, j).imag();
        }
      }
    }
    CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(coords).rank() == dim * dim);
  }
}

TEST_CASE("sampled violations on the 2x2 example") {
  const DensityOp rhos[] = {DensityOp::from_matrix(mat2(1, 0, 0, 0))};
  const auto v = sampled_violations(diag10(), half(), rhos);
  CHECK(v.order_exchange == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(v.ignored > 0.1);
  CHECK(v.nondisturbance > 0.1);
}

TEST_CASE("equivalence experiment") {
  const int dims[] = {2, 3, 4};
  const auto report = equivalence_experiment(dims, 24, 10, 5);
  CHECK(report.trials.size() == 24);
  CHECK(report.perfect());
  CHECK(report.generic_without_witness == 0);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(report.identity[k].off_diagonal() == 0);
    CHECK(report.sampled[k].off_diagonal() == 0);
    CHECK(report.identity[k].both == 12);
    CHECK(report.identity[k].neither == 12);
  }
  for (const auto& t : report.trials) {
    CHECK(t.dim == dims[t.trial % 3]);
    CHECK(t.mode == (t.trial % 2 == 0 ? PairMode::Commuting : PairMode::Generic));
    CHECK(t.ranks.first >= 1);
    CHECK(t.ranks.first < t.dim);
    if (t.mode == PairMode::Generic) {
      REQUIRE(t.witness);
      CHECK(t.witness->violation() > 1e-6);
      check_density(DensityOp::from_matrix(t.witness->rho, 1e-9), 1e-9);
    }
  }

  const auto again = equivalence_experiment(dims, 24, 10, 5);
  for (std::size_t i = 0; i < report.trials.size(); ++i) {
    CHECK(report.trials[i].commutator_defect == again.trials[i].commutator_defect);
    CHECK(report.trials[i].seed == again.trials[i].seed);
  }
}

}  // TEST_SUITE
