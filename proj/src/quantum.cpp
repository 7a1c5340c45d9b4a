#include "incompat/quantum.hpp"

#include "incompat/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace incompat {

namespace {

using cd = std::complex<double>;

void require_same_dim(Eigen::Index a, Eigen::Index b) {
  if (a != b) throw DimensionMismatch("dimension " + std::to_string(a) + " vs " + std::to_string(b));
}

ComplexVector gaussian_vector(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  ComplexVector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = cd(normal(rng), normal(rng));
  return v;
}

// Orthonormal basis from a seeded complex Gaussian matrix.
ComplexMatrix random_basis(int dim, std::mt19937_64& rng) {
  ComplexMatrix g(dim, dim);
  for (int j = 0; j < dim; ++j) g.col(j) = gaussian_vector(dim, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  return qr.householderQ() * ComplexMatrix::Identity(dim, dim);
}

}  // namespace

// ---------------------------------------------------------------------------
// Operators

Projector Projector::from_matrix(ComplexMatrix m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0) throw ValidationError("projector must be a non-empty square matrix");
  if (!m.allFinite()) throw ValidationError("projector has non-finite entries");
  if ((m - m.adjoint()).norm() > tol) throw ValidationError("projector is not Hermitian");
  if ((m * m - m).norm() > tol) throw ValidationError("projector is not idempotent");
  const double trace = m.trace().real();
  const double rank = std::round(trace);
  if (std::abs(trace - rank) > tol) throw ValidationError("projector trace is not an integer");
  return Projector(std::move(m), static_cast<int>(rank));
}

Projector Projector::complement() const {
  const auto d = dim();
  return Projector(ComplexMatrix::Identity(d, d) - m_, static_cast<int>(d) - rank_);
}

DensityOp DensityOp::from_matrix(ComplexMatrix m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0) throw ValidationError("density operator must be a non-empty square matrix");
  if (!m.allFinite()) throw ValidationError("density operator has non-finite entries");
  if ((m - m.adjoint()).norm() > tol) throw ValidationError("density operator is not Hermitian");
  if (std::abs(m.trace() - cd(1, 0)) > tol) throw ValidationError("density operator trace is not 1");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(m, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -tol) throw ValidationError("density operator is not positive semidefinite");
  return DensityOp(std::move(m));
}

DensityOp DensityOp::pure(const ComplexVector& v) {
  const double n2 = v.squaredNorm();
  if (n2 == 0) throw ValidationError("zero state vector");
  return DensityOp(v * v.adjoint() / n2);
}

ProjectorFamily::ProjectorFamily(std::vector<Projector> members, double tol) : members_(std::move(members)) {
  if (members_.empty()) throw ValidationError("empty projector family");
  const auto d = members_.front().dim();
  ComplexMatrix sum = ComplexMatrix::Zero(d, d);
  for (std::size_t i = 0; i < members_.size(); ++i) {
    require_same_dim(members_[i].dim(), d);
    sum += members_[i].matrix();
    for (std::size_t j = i + 1; j < members_.size(); ++j) {
      if ((members_[i].matrix() * members_[j].matrix()).norm() > tol) {
        throw ValidationError("projector family members are not orthogonal");
      }
    }
  }
  if ((sum - ComplexMatrix::Identity(d, d)).norm() > tol) throw ValidationError("projector family is not complete");
}

ProjectorFamily ProjectorFamily::binary(const Projector& p) { return ProjectorFamily({p, p.complement()}); }

Projector make_projector(std::span<const ComplexVector> vectors, double tol) {
  if (vectors.empty()) throw RankDeficient("no spanning vectors");
  const auto d = vectors.front().size();
  std::vector<ComplexVector> basis;
  for (const auto& v : vectors) {
    require_same_dim(v.size(), d);
    ComplexVector w = v;
    // Two Gram-Schmidt passes keep the basis orthonormal to working precision.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& u : basis) w -= u * u.dot(w);
    }
    if (w.norm() <= tol * std::max(1.0, v.norm())) throw RankDeficient("spanning vectors are linearly dependent");
    basis.push_back(w / w.norm());
  }
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  for (const auto& u : basis) m += u * u.adjoint();
  return Projector::from_matrix(m);
}

DensityOp lueders_condition(const DensityOp& rho, const Projector& p, double tol) {
  require_same_dim(rho.dim(), p.dim());
  const double prob = (rho.matrix() * p.matrix()).trace().real();
  if (prob <= tol) throw ZeroCondition("Tr(rho P) is zero");
  ComplexMatrix out = p.matrix() * rho.matrix() * p.matrix();
  out = (out + out.adjoint()) / 2.0;
  out /= out.trace().real();
  return DensityOp::from_matrix(std::move(out), 1e-9);
}

double seq_prob_q(const DensityOp& rho, std::span<const Projector> projs) {
  if (projs.empty()) throw std::invalid_argument("seq_prob_q needs at least one projector");
  ComplexMatrix m = rho.matrix();
  for (const auto& p : projs) {
    require_same_dim(p.dim(), rho.dim());
    m = p.matrix() * m * p.matrix();
  }
  return std::clamp(m.trace().real(), 0.0, 1.0);
}

double commutator_defect(const Projector& p, const Projector& q) {
  require_same_dim(p.dim(), q.dim());
  return (p.matrix() * q.matrix() - q.matrix() * p.matrix()).norm();
}

IdentityCheck criterion_identity_check(CriterionKind kind, const ProjectorSide& p, const ProjectorSide& q,
                                       double tol) {
  double defect = 0;
  switch (kind) {
    case CriterionKind::OrderExchange: {
      const auto* P = std::get_if<Projector>(&p);
      const auto* Q = std::get_if<Projector>(&q);
      if (!P || !Q) throw ShapeMismatch("OrderExchange takes two single projectors");
      require_same_dim(P->dim(), Q->dim());
      const auto& pm = P->matrix();
      const auto& qm = Q->matrix();
      defect = (pm * qm * pm - qm * pm * qm).norm();
      break;
    }
    case CriterionKind::IgnoredMeasurement: {
      const auto* P = std::get_if<Projector>(&p);
      const auto* Q = std::get_if<ProjectorFamily>(&q);
      if (!P || !Q) throw ShapeMismatch("IgnoredMeasurement takes a projector and a projector family");
      require_same_dim(P->dim(), Q->dim());
      ComplexMatrix sum = ComplexMatrix::Zero(P->dim(), P->dim());
      for (const auto& qs : Q->members()) sum += qs.matrix() * P->matrix() * qs.matrix();
      defect = (sum - P->matrix()).norm();
      break;
    }
    case CriterionKind::NonDisturbance: {
      const auto* P = std::get_if<ProjectorFamily>(&p);
      const auto* Q = std::get_if<Projector>(&q);
      if (!P || !Q) throw ShapeMismatch("NonDisturbance takes a projector family and a projector");
      require_same_dim(P->dim(), Q->dim());
      const auto& members = P->members();
      const auto& qm = Q->matrix();
      for (std::size_t j = 0; j < members.size(); ++j) {
        const ComplexMatrix pqp = members[j].matrix() * qm * members[j].matrix();
        for (std::size_t k = 0; k < members.size(); ++k) {
          const ComplexMatrix lhs = members[j].matrix() * qm * members[k].matrix() * qm * members[j].matrix();
          defect = std::max(defect, (j == k ? ComplexMatrix(lhs - pqp) : lhs).norm());
        }
      }
      break;
    }
  }
  return {defect, defect <= tol};
}

IdentityCheck single_pair_nondisturbance_check(const Projector& p, const Projector& q, double tol) {
  require_same_dim(p.dim(), q.dim());
  const ComplexMatrix pqp = p.matrix() * q.matrix() * p.matrix();
  const double defect = (pqp * q.matrix() * p.matrix() - pqp).norm();
  return {defect, defect <= tol};
}

// ---------------------------------------------------------------------------
// Random pairs and states

std::string_view to_string(PairMode mode) { return mode == PairMode::Commuting ? "commuting" : "generic"; }

std::pair<Projector, Projector> gen_pair(int dim, PairMode mode, std::pair<int, int> ranks, std::uint64_t seed) {
  const auto [r1, r2] = ranks;
  if (r1 < 1 || r2 < 1 || r1 >= dim || r2 >= dim) throw std::invalid_argument("ranks must satisfy 1 <= r < dim");

  if (mode == PairMode::Commuting) {
    std::mt19937_64 rng(seed);
    const ComplexMatrix u = random_basis(dim, rng);
    auto diagonal_projector = [&](int rank) {
      std::vector<int> idx(static_cast<std::size_t>(dim));
      std::iota(idx.begin(), idx.end(), 0);
      std::shuffle(idx.begin(), idx.end(), rng);
      std::vector<ComplexVector> cols;
      for (int k = 0; k < rank; ++k) cols.emplace_back(u.col(idx[static_cast<std::size_t>(k)]));
      ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
      for (const auto& c : cols) m += c * c.adjoint();
      return Projector::from_matrix(std::move(m));
    };
    Projector p = diagonal_projector(r1);
    Projector q = diagonal_projector(r2);
    return {std::move(p), std::move(q)};
  }

  for (std::uint64_t attempt = 0;; ++attempt) {
    std::mt19937_64 rng(attempt == 0 ? seed : derive_seed(seed, attempt));
    auto random_span = [&](int rank) {
      std::vector<ComplexVector> vs;
      for (int k = 0; k < rank; ++k) vs.push_back(gaussian_vector(dim, rng));
      return make_projector(vs);
    };
    Projector p = random_span(r1);
    Projector q = random_span(r2);
    if (commutator_defect(p, q) > 1e-6) return {std::move(p), std::move(q)};
  }
}

std::vector<DensityOp> spanning_density_set(int dim) {
  std::vector<DensityOp> out;
  const double s = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < dim; ++i) out.push_back(DensityOp::pure(ComplexVector::Unit(dim, i)));
  for (int i = 0; i < dim; ++i) {
    for (int j = i + 1; j < dim; ++j) {
      ComplexVector plus = ComplexVector::Zero(dim);
      plus(i) = s;
      plus(j) = s;
      out.push_back(DensityOp::pure(plus));
      ComplexVector phase = ComplexVector::Zero(dim);
      phase(i) = s;
      phase(j) = cd(0, s);
      out.push_back(DensityOp::pure(phase));
    }
  }
  return out;
}

DensityOp random_pure_state(int dim, std::mt19937_64& rng) { return DensityOp::pure(gaussian_vector(dim, rng)); }

CriterionDefects sampled_violations(const Projector& p, const Projector& q, std::span<const DensityOp> rhos) {
  const Projector qc = q.complement();
  CriterionDefects out;
  for (const auto& rho : rhos) {
    const std::array<Projector, 2> pq{p, q};
    const std::array<Projector, 2> qp{q, p};
    const std::array<Projector, 2> qcp{qc, p};
    const std::array<Projector, 3> pqp{p, q, p};
    const double prob_pq = seq_prob_q(rho, pq);
    out.order_exchange = std::max(out.order_exchange, std::abs(prob_pq - seq_prob_q(rho, qp)));
    out.ignored = std::max(out.ignored, std::abs(seq_prob_q(rho, qp) + seq_prob_q(rho, qcp) -
                                                 seq_prob_q(rho, std::span(&p, 1))));
    out.nondisturbance = std::max(out.nondisturbance, std::abs(seq_prob_q(rho, pqp) - prob_pq));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiment

void Confusion::add(bool commutes, bool holds) {
  if (commutes && holds) ++both;
  else if (commutes) ++commute_only;
  else if (holds) ++criterion_only;
  else ++neither;
}

bool EquivalenceReport::perfect() const {
  auto clean = [](const auto& arr) {
    return std::all_of(arr.begin(), arr.end(), [](const Confusion& c) { return c.off_diagonal() == 0; });
  };
  return clean(identity) && clean(sampled) && single_pair.off_diagonal() == 0 && generic_without_witness == 0;
}

EquivalenceReport equivalence_experiment(std::span<const int> dims, std::size_t trials, std::size_t rho_samples,
                                         std::uint64_t seed, double tol) {
  if (trials < 1) throw std::invalid_argument("equivalence_experiment needs at least one trial");
  if (dims.empty()) throw std::invalid_argument("equivalence_experiment needs at least one dimension");
  for (int d : dims) {
    if (d < 2) throw std::invalid_argument("dimensions must be at least 2");
  }

  EquivalenceReport report;
  report.tolerance = tol;
  for (std::size_t t = 0; t < trials; ++t) {
    TrialReport tr;
    tr.trial = t;
    tr.seed = derive_seed(seed, t);
    tr.dim = dims[t % dims.size()];
    tr.mode = (t % 2 == 0) ? PairMode::Commuting : PairMode::Generic;
    std::mt19937_64 rng(tr.seed);
    std::uniform_int_distribution<int> rank(1, tr.dim - 1);
    tr.ranks = {rank(rng), rank(rng)};
    const auto [p, q] = gen_pair(tr.dim, tr.mode, tr.ranks, derive_seed(tr.seed, 0));

    tr.commutator_defect = commutator_defect(p, q);
    const ProjectorFamily pf = ProjectorFamily::binary(p);
    const ProjectorFamily qf = ProjectorFamily::binary(q);
    tr.identity_defects.order_exchange = criterion_identity_check(CriterionKind::OrderExchange, p, q, tol).defect;
    tr.identity_defects.ignored = criterion_identity_check(CriterionKind::IgnoredMeasurement, p, qf, tol).defect;
    tr.identity_defects.nondisturbance = criterion_identity_check(CriterionKind::NonDisturbance, pf, q, tol).defect;
    tr.single_pair_defect = single_pair_nondisturbance_check(p, q, tol).defect;

    const auto spanning = spanning_density_set(tr.dim);
    std::vector<DensityOp> random;
    for (std::size_t k = 0; k < rho_samples; ++k) random.push_back(random_pure_state(tr.dim, rng));
    std::vector<DensityOp> all = spanning;
    all.insert(all.end(), random.begin(), random.end());
    tr.sampled = sampled_violations(p, q, all);

    if (tr.mode == PairMode::Generic) {
      OrderExchangeWitness best;
      auto consider = [&](const std::vector<DensityOp>& rhos, const char* source) {
        for (std::size_t k = 0; k < rhos.size(); ++k) {
          const std::array<Projector, 2> pq{p, q};
          const std::array<Projector, 2> qp{q, p};
          const double a = seq_prob_q(rhos[k], pq);
          const double b = seq_prob_q(rhos[k], qp);
          if (!tr.witness || std::abs(a - b) > best.violation()) {
            best = OrderExchangeWitness{source, k, a, b, rhos[k].matrix()};
            tr.witness = best;
          }
        }
      };
      consider(spanning, "spanning");
      consider(random, "random");
      if (!tr.witness || tr.witness->violation() <= 1e-6) ++report.generic_without_witness;
    }

    const bool commutes = tr.commutator_defect <= tol;
    report.identity[static_cast<std::size_t>(CriterionKind::OrderExchange)].add(
        commutes, tr.identity_defects.order_exchange <= tol);
    report.identity[static_cast<std::size_t>(CriterionKind::IgnoredMeasurement)].add(
        commutes, tr.identity_defects.ignored <= tol);
    report.identity[static_cast<std::size_t>(CriterionKind::NonDisturbance)].add(
        commutes, tr.identity_defects.nondisturbance <= tol);
    report.sampled[static_cast<std::size_t>(CriterionKind::OrderExchange)].add(commutes,
                                                                              tr.sampled.order_exchange <= tol);
    report.sampled[static_cast<std::size_t>(CriterionKind::IgnoredMeasurement)].add(commutes,
                                                                                   tr.sampled.ignored <= tol);
    report.sampled[static_cast<std::size_t>(CriterionKind::NonDisturbance)].add(commutes,
                                                                               tr.sampled.nondisturbance <= tol);
    report.single_pair.add(commutes, tr.single_pair_defect <= tol);
    report.trials.push_back(std::move(tr));
  }
  return report;
}

}  // namespace incompat
