#pragma once

// Projector/density-operator counterparts of the classical criteria.
//
// Probabilities follow the Lueders rule: after observing the value with
// projector P, rho -> P rho P / Tr(rho P). A sequence P1, ..., Pn then has
// probability Tr(Pn ... P1 rho P1 ... Pn). Each of the three classical
// criteria, imposed for every rho, is equivalent to PQ = QP; this module
// checks that numerically on seeded random projector pairs.

#include "incompat/compat.hpp"

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace incompat {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kIdentityTolerance = 1e-9;
inline constexpr double kConstructionTolerance = 1e-12;

class Projector {
 public:
  /// Throws ValidationError unless `m` is Hermitian and idempotent within
  /// `tol` (Frobenius norm) with near-integer trace.
  static Projector from_matrix(ComplexMatrix m, double tol = kConstructionTolerance);

  const ComplexMatrix& matrix() const { return m_; }
  int rank() const { return rank_; }
  Eigen::Index dim() const { return m_.rows(); }
  Projector complement() const;

 private:
  Projector(ComplexMatrix m, int rank) : m_(std::move(m)), rank_(rank) {}
  ComplexMatrix m_;
  int rank_ = 0;
};

class DensityOp {
 public:
  /// Throws ValidationError unless `m` is Hermitian, positive semidefinite and
  /// of unit trace, all within `tol`.
  static DensityOp from_matrix(ComplexMatrix m, double tol = kConstructionTolerance);
  /// |v><v| / <v|v>.
  static DensityOp pure(const ComplexVector& v);

  const ComplexMatrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  explicit DensityOp(ComplexMatrix m) : m_(std::move(m)) {}
  ComplexMatrix m_;
};

/// Mutually orthogonal projectors summing to the identity.
class ProjectorFamily {
 public:
  explicit ProjectorFamily(std::vector<Projector> members, double tol = kConstructionTolerance);
  /// {P, 1 - P}.
  static ProjectorFamily binary(const Projector& p);

  const std::vector<Projector>& members() const { return members_; }
  Eigen::Index dim() const { return members_.front().dim(); }

 private:
  std::vector<Projector> members_;
};

/// Orthogonal projector onto the span of `vectors`. Throws RankDeficient when
/// a vector is (numerically) in the span of the previous ones.
Projector make_projector(std::span<const ComplexVector> vectors, double tol = 1e-10);

/// P rho P / Tr(rho P). Throws ZeroCondition when Tr(rho P) <= tol.
DensityOp lueders_condition(const DensityOp& rho, const Projector& p, double tol = kConstructionTolerance);

/// Tr(Pn ... P1 rho P1 ... Pn), clamped to [0, 1].
double seq_prob_q(const DensityOp& rho, std::span<const Projector> projs);

/// Frobenius norm of PQ - QP.
double commutator_defect(const Projector& p, const Projector& q);

using ProjectorSide = std::variant<Projector, ProjectorFamily>;

struct IdentityCheck {
  double defect = 0;
  bool holds = false;
};

/// Operator identity behind each criterion, with the defect measured as the
/// largest Frobenius norm over its equations:
///
///   OrderExchange       (P, Q single)      PQP = QPQ
///   IgnoredMeasurement  (P single, Q fam.) sum_s Q_s P Q_s = P
///   NonDisturbance      (P fam., Q single) P_j Q P_j' Q P_j = delta_jj' P_j Q P_j
///
/// Throws ShapeMismatch for other side shapes.
IdentityCheck criterion_identity_check(CriterionKind kind, const ProjectorSide& p, const ProjectorSide& q,
                                       double tol = kIdentityTolerance);

/// Single-pair non-disturbance form PQPQP = PQP (derived-form: equivalent to
/// PQ = QP, since PQP - PQPQP = ((1-P)QP)^dagger ((1-P)QP)).
IdentityCheck single_pair_nondisturbance_check(const Projector& p, const Projector& q,
                                               double tol = kIdentityTolerance);

enum class PairMode { Commuting, Generic };

std::string_view to_string(PairMode mode);

/// Seeded projector pair of the given ranks in dimension `dim`. Commuting
/// pairs are diagonal in one random orthonormal basis; generic pairs project
/// onto independent random spans and are redrawn while their commutator
/// defect is at most 1e-6.
std::pair<Projector, Projector> gen_pair(int dim, PairMode mode, std::pair<int, int> ranks, std::uint64_t seed);

/// d^2 density operators spanning the Hermitian matrices: |i><i|, and for
/// i < j the states (|i> + |j>)/sqrt2 and (|i> + i|j>)/sqrt2.
std::vector<DensityOp> spanning_density_set(int dim);

DensityOp random_pure_state(int dim, std::mt19937_64& rng);

/// Largest deviation of each criterion's probability equality over `rhos`,
/// with the P family {P, 1-P} and Q family {Q, 1-Q}:
///   order_exchange  |Pr(P & Q) - Pr(Q & P)|
///   ignored         |Pr(Q & P) + Pr(1-Q & P) - Pr(P)|
///   nondisturbance  |Pr(P & Q & P) - Pr(P & Q)|
struct CriterionDefects {
  double order_exchange = 0;
  double ignored = 0;
  double nondisturbance = 0;
};

CriterionDefects sampled_violations(const Projector& p, const Projector& q, std::span<const DensityOp> rhos);

struct OrderExchangeWitness {
  std::string source;  // "spanning" or "random"
  std::size_t index = 0;
  double pq = 0;
  double qp = 0;
  ComplexMatrix rho;

  double violation() const { return std::abs(pq - qp); }
};

struct TrialReport {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  int dim = 0;
  PairMode mode = PairMode::Commuting;
  std::pair<int, int> ranks{1, 1};
  double commutator_defect = 0;
  CriterionDefects identity_defects;
  /// PQPQP = PQP; reported separately as a derived form.
  double single_pair_defect = 0;
  CriterionDefects sampled;
  std::optional<OrderExchangeWitness> witness;
};

/// Counts of (commutes, criterion holds) combinations.
struct Confusion {
  std::size_t both = 0;
  std::size_t commute_only = 0;
  std::size_t criterion_only = 0;
  std::size_t neither = 0;

  std::size_t off_diagonal() const { return commute_only + criterion_only; }
  void add(bool commutes, bool holds);

  friend bool operator==(const Confusion&, const Confusion&) = default;
};

struct EquivalenceReport {
  double tolerance = kIdentityTolerance;
  std::vector<TrialReport> trials;
  /// Indexed by CriterionKind.
  std::array<Confusion, 3> identity{};
  std::array<Confusion, 3> sampled{};
  Confusion single_pair;
  /// Generic pairs whose best order-exchange witness is at most 1e-6.
  std::size_t generic_without_witness = 0;

  bool perfect() const;
};

/// Runs `trials` seeded trials cycling through `dims`, alternating commuting
/// and generic pairs with random ranks in [1, dim-1].
EquivalenceReport equivalence_experiment(std::span<const int> dims, std::size_t trials, std::size_t rho_samples,
                                         std::uint64_t seed, double tol = kIdentityTolerance);

}  // namespace incompat
