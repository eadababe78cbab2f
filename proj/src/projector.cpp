#include "nsem/projector.hpp"

#include "nsem/errors.hpp"
#include "nsem/numerics.hpp"
#include "nsem/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nsem {

namespace {

constexpr double kDropTolerance = 1e-8; // post-reorthogonalization column floor

// Shared selection kernel: complement basis = eigendirections of k k^T with
// eigenvalue >= tau, obtained through the thin SVD of the factor k itself
// (eigenvalues are the squared singular values; same operator, better
// conditioned than decomposing the covariance).
Matrix basis_from_keys(const Matrix& keys, double tau) {
    if (keys.cols() == 0) return Matrix(keys.rows(), 0);
    const SvdResult svd = thin_svd(keys);
    std::size_t q = 0;
    while (q < svd.sigma.size() && svd.sigma[q] * svd.sigma[q] >= tau) ++q;
    return svd.u.columns(0, q);
}

void require_positive_tau(double tau) {
    if (!(tau > 0.0)) throw numeric_error("threshold tau must be positive");
}

} // namespace

Projector::Projector(std::size_t dim, Matrix complement_basis, int generation)
    : dim_(dim), basis_(std::move(complement_basis)), generation_(generation) {
    if (dim_ == 0) throw dimension_error("projector dimension must be positive");
    if (basis_.cols() > 0 && basis_.rows() != dim_) {
        throw dimension_error("complement basis rows do not match projector dimension");
    }
    if (basis_.cols() > dim_) {
        throw dimension_error("complement basis rank exceeds projector dimension");
    }
}

Matrix Projector::apply(const Matrix& x) const {
    if (x.rows() != dim_) {
        throw dimension_error("projector of dimension " + std::to_string(dim_) +
                              " applied to " + std::to_string(x.rows()) + "-row matrix");
    }
    if (rank() == 0) return x;
    const Matrix coeffs = product_tn(basis_, x); // B^T x
    Matrix out = x;
    return add_scaled(out, -1.0, product(basis_, coeffs));
}

Matrix Projector::dense() const {
    Matrix p = Matrix::identity(dim_);
    if (rank() == 0) return p;
    return subtract(p, product_nt(basis_, basis_));
}

double Projector::orthonormality_error() const {
    if (rank() == 0) return 0.0;
    Matrix gram = product_tn(basis_, basis_);
    for (std::size_t i = 0; i < gram.rows(); ++i) gram(i, i) -= 1.0;
    return frobenius_norm(gram);
}

Projector estimate_initial(const Matrix& k0, double tau) {
    require_positive_tau(tau);
    if (k0.rows() == 0) throw dimension_error("estimate_initial: keys need at least one row");
    if (!k0.all_finite()) throw numeric_error("estimate_initial: non-finite key entries");
    return Projector(k0.rows(), basis_from_keys(k0, tau), 0);
}

std::pair<Projector, AlignmentRecord> align(const Projector& p, const Matrix& k_prev, double tau) {
    require_positive_tau(tau);
    if (k_prev.rows() != p.dim()) {
        throw dimension_error("align: key rows " + std::to_string(k_prev.rows()) +
                              " do not match projector dimension " + std::to_string(p.dim()));
    }
    if (!k_prev.all_finite()) throw numeric_error("align: non-finite key entries");

    AlignmentRecord record;
    if (k_prev.cols() == 0) {
        record.retained_directions = Matrix(p.dim(), 0);
        return {Projector(p.dim(), p.complement_basis(), p.generation() + 1), record};
    }

    const Matrix z = p.apply(k_prev);
    const SvdResult svd = thin_svd(z);

    std::size_t q = 0;
    while (q < svd.sigma.size() && svd.sigma[q] >= tau) ++q;
    record.retained_sigmas.assign(svd.sigma.begin(), svd.sigma.begin() + q);
    record.discarded_sigmas.assign(svd.sigma.begin() + q, svd.sigma.end());
    if (q > 0) {
        record.spectral_gap = svd.sigma[q - 1] - (q < svd.sigma.size() ? svd.sigma[q] : 0.0);
    }

    // One classical Gram-Schmidt pass of the new directions against the
    // existing basis, renormalize, drop columns that collapse below 1e-8.
    Matrix fresh = svd.u.columns(0, q);
    if (p.rank() > 0 && q > 0) {
        const Matrix coeffs = product_tn(p.complement_basis(), fresh);
        fresh = add_scaled(fresh, -1.0, product(p.complement_basis(), coeffs));
    }
    Matrix kept(p.dim(), 0);
    std::vector<double> kept_sigmas;
    for (std::size_t j = 0; j < q; ++j) {
        Matrix col = fresh.columns(j, 1);
        const double norm = frobenius_norm(col);
        if (norm < kDropTolerance) continue;
        kept_sigmas.push_back(record.retained_sigmas[j]);
        kept = hcat(kept, scale(col, 1.0 / norm));
    }
    record.retained_directions = kept;
    record.retained_sigmas = std::move(kept_sigmas);

    Projector next(p.dim(), hcat(p.complement_basis(), record.retained_directions),
                   p.generation() + 1);
    return {std::move(next), std::move(record)};
}

Projector recompute_projector(const Matrix& k_hat, double tau) {
    require_positive_tau(tau);
    if (k_hat.rows() == 0) throw dimension_error("recompute_projector: keys need at least one row");
    if (!k_hat.all_finite()) throw numeric_error("recompute_projector: non-finite key entries");
    return Projector(k_hat.rows(), basis_from_keys(k_hat, tau), 0);
}

Matrix oracle_recompute(const Matrix& k_hat, double tau) {
    return recompute_projector(k_hat, tau).dense();
}

double deviation(const Projector& p, const Matrix& ideal) {
    if (ideal.rows() != p.dim() || ideal.cols() != p.dim()) {
        throw dimension_error("deviation: reference shape does not match projector dimension");
    }
    return spectral_norm(subtract(p.dense(), ideal));
}

double truncation_error_bound(const std::vector<AlignmentRecord>& records,
                              const std::vector<Matrix>& projected_keys,
                              const std::vector<Matrix>& projector_errors,
                              double c_t_min_sigma) {
    if (records.size() != projected_keys.size() || records.size() != projector_errors.size()) {
        throw dimension_error("truncation_error_bound: per-step inputs differ in length");
    }
    if (!(c_t_min_sigma > 0.0)) {
        throw numeric_error("truncation_error_bound: smallest singular value must be positive");
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < records.size(); ++j) {
        const AlignmentRecord& rec = records[j];
        if (!rec.discarded_sigmas.empty() && !(rec.spectral_gap > 0.0)) {
            throw degenerate_gap_error("truncation_error_bound: zero spectral gap at step " +
                                       std::to_string(j + 1) + " with a nonempty discarded block");
        }
        double tail_sq = 0.0;
        for (double s : rec.discarded_sigmas) tail_sq += s * s;
        sum += std::sqrt(tail_sq);

        const Matrix& err = projector_errors[j];
        const double err_norm = err.empty() ? 0.0 : spectral_norm(err);
        if (err_norm > 0.0) {
            if (!(rec.spectral_gap > 0.0)) {
                throw degenerate_gap_error(
                    "truncation_error_bound: zero spectral gap at step " + std::to_string(j + 1) +
                    " with a nonzero projector error");
            }
            sum += err_norm / rec.spectral_gap * frobenius_norm(projected_keys[j]);
        }
    }
    return std::clamp(sum / c_t_min_sigma, 0.0, 1.0);
}

InterferenceReport check_interference_bound(const Projector& p, const Matrix& ideal,
                                            const Matrix& c_t, double gamma_cap, int trials,
                                            std::uint64_t seed) {
    if (!(gamma_cap > 0.0)) throw numeric_error("interference check: gamma cap must be positive");
    if (c_t.rows() != p.dim()) {
        throw dimension_error("interference check: span matrix rows do not match dimension");
    }
    if (frobenius_norm(c_t) == 0.0) {
        throw numeric_error("interference check: span matrix is zero");
    }

    const double dev = deviation(p, ideal);
    Rng rng(seed);
    InterferenceReport report;
    report.trials = trials;
    for (int trial = 0; trial < trials; ++trial) {
        Matrix delta = gaussian_matrix(rng, p.dim(), p.dim());
        const double delta_norm = spectral_norm(delta);
        if (delta_norm > 0.0) delta = scale(delta, gamma_cap / delta_norm);

        Matrix x(c_t.rows(), 1);
        double x_norm = 0.0;
        for (int attempt = 0; attempt < 16 && x_norm == 0.0; ++attempt) {
            x = product(c_t, gaussian_matrix(rng, c_t.cols(), 1));
            x_norm = frobenius_norm(x);
        }

        const double lhs = frobenius_norm(product(delta, p.apply(x)));
        const double rhs = gamma_cap * dev * x_norm + 1e-8;
        report.max_ratio = std::max(report.max_ratio, lhs / rhs);
        if (lhs > rhs) report.pass = false;
    }
    return report;
}

} // namespace nsem
