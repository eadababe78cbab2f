#pragma once

#include "nsem/matrix.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace nsem {

/// Orthogonal projector onto the null space of all protected keys, stored
/// through its complement basis: P = I - B B^T where the columns of B span
/// the protected key range. The basis form keeps every application at
/// O(d * r * cols) instead of materializing a d x d operator.
class Projector {
public:
    /// Empty placeholder; every use other than assignment throws.
    Projector() = default;

    /// Full-space projector (nothing protected yet, P = I).
    static Projector full(std::size_t dim) { return Projector(dim, Matrix(dim, 0), 0); }

    Projector(std::size_t dim, Matrix complement_basis, int generation);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t rank() const noexcept { return basis_.cols(); }
    int generation() const noexcept { return generation_; }
    void set_generation(int g) noexcept { generation_ = g; }

    const Matrix& complement_basis() const noexcept { return basis_; }

    /// P x = x - B (B^T x).
    Matrix apply(const Matrix& x) const;

    /// Materialized I - B B^T. Intended for tests and verification only.
    Matrix dense() const;

    /// ||B^T B - I||_F, the accumulated orthonormality drift of the basis.
    double orthonormality_error() const;

private:
    std::size_t dim_ = 0;
    Matrix basis_; // dim x rank, orthonormal columns
    int generation_ = 0;
};

/// One alignment step's spectrum bookkeeping: which directions of the
/// projected key block were absorbed into the complement basis and which
/// were discarded as below-threshold tail.
struct AlignmentRecord {
    Matrix retained_directions;          // dim x q, orthonormal
    std::vector<double> retained_sigmas; // >= tau, descending
    std::vector<double> discarded_sigmas;// < tau, descending
    double spectral_gap = 0.0;           // sigma_q - sigma_{q+1}; 0 when undefined
};

/// Builds the initial projector from the preserved-key covariance: the
/// complement basis collects eigendirections of k0 k0^T with eigenvalue
/// >= tau. Empty k0 yields the full projector.
Projector estimate_initial(const Matrix& k0, double tau);

/// Deflation step: SVD of the projected keys z = p k_prev, absorb left
/// singular directions with sigma >= tau into the complement basis (after a
/// re-orthogonalization pass against the existing basis), increment the
/// generation. Returns the new projector and the spectrum record.
std::pair<Projector, AlignmentRecord> align(const Projector& p, const Matrix& k_prev, double tau);

/// Brute-force reference: complement basis recomputed from the full key
/// concatenation, thresholding eigenvalues of k_hat k_hat^T at tau.
Projector recompute_projector(const Matrix& k_hat, double tau);

/// Dense d x d form of recompute_projector. Test/verification oracle.
Matrix oracle_recompute(const Matrix& k_hat, double tau);

/// Spectral-norm distance between the projector and a dense reference.
double deviation(const Projector& p, const Matrix& ideal);

/// Cumulative deviation bound for truncated alignment streams:
///   min{ 1, (1/c_t_min_sigma) * sum_j ( ||E_j||_2 / gap_j * ||R*_j||_F + ||tail_j||_F ) }
/// where records carry gap_j and the discarded tail, projected_keys carry
/// the reference-projected key blocks R*_j, and projector_errors carry
/// E_j = (P_{j-1} - P*_{j-1}) K_j as computed by the caller.
/// Throws degenerate_gap_error when a step discarded directions across a
/// zero spectral gap.
double truncation_error_bound(const std::vector<AlignmentRecord>& records,
                              const std::vector<Matrix>& projected_keys,
                              const std::vector<Matrix>& projector_errors,
                              double c_t_min_sigma);

struct InterferenceReport {
    double max_ratio = 0.0; // max over trials of lhs / rhs
    bool pass = true;
    int trials = 0;
};

/// Samples random edits delta with ||delta||_2 <= gamma_cap and random
/// x in span(c_t), and checks ||delta P x|| <= gamma_cap ||P - ideal||_2 ||x||
/// with 1e-8 additive slack.
InterferenceReport check_interference_bound(const Projector& p, const Matrix& ideal,
                                            const Matrix& c_t, double gamma_cap, int trials,
                                            std::uint64_t seed);

} // namespace nsem
