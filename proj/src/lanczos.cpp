#include "hartree/lanczos.hpp"
#include "hartree/errors.hpp"
#include "hartree/fft.hpp"
#include "hartree/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace hartree {

Field smooth_random_field(const Grid& g, std::uint64_t seed, bool real_only) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    Field u(g);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = cplx(nd(rng), real_only ? 0.0 : nd(rng));
    const double kc = 0.5 * g.k_max();
    fft_forward(g, u.data());
    const int n = g.n();
    std::size_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx) {
                if (ix == n / 2 || iy == n / 2 || iz == n / 2) {
                    u[idx] = 0.0;
                    continue;
                }
                u[idx] *= std::exp(-wavenumber_sq(g, idx) / (kc * kc));
            }
    fft_inverse(g, u.data());
    if (real_only)
        for (std::size_t i = 0; i < u.size(); ++i) u[i] = u[i].real();
    u *= 1.0 / norm(u);
    return u;
}

double symmetry_defect(const LinearOp& A, const Grid& g, int probes, std::uint64_t seed, const LinearOp& restrict) {
    double worst = 0.0;
    for (int p = 0; p < probes; ++p) {
        Field u = smooth_random_field(g, seed + 2 * p);
        Field w = smooth_random_field(g, seed + 2 * p + 1);
        if (restrict) u = restrict(u), w = restrict(w);
        const Field Au = A(u), Aw = A(w);
        const double a = inner(Au, w), b = inner(u, Aw);
        const double scale = norm(Au) * norm(w) + norm(Aw) * norm(u) + 1e-300;
        worst = std::max(worst, std::abs(a - b) / scale);
    }
    return worst;
}

namespace {

// Orthonormalizes `block` against `basis` and itself (two passes of
// classical Gram-Schmidt); returns the R factor of the block part and drops
// nothing: rank-deficient columns are replaced by fresh random directions.
Eigen::MatrixXd orthonormalize_block(std::vector<Field>& block, const std::vector<Field>& basis, std::uint64_t& seed,
                                     const LinearOp& restrict) {
    const int b = static_cast<int>(block.size());
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(b, b);
    for (int pass = 0; pass < 2; ++pass)
        for (auto& x : block)
            for (const auto& q : basis) x.axpy(-inner(q, x), q);
    for (int j = 0; j < b; ++j) {
        const double n0 = norm(block[j]);
        for (int pass = 0; pass < 2; ++pass)
            for (int i = 0; i < j; ++i) {
                const double c = inner(block[i], block[j]);
                block[j].axpy(-c, block[i]);
                R(i, j) += c;
            }
        double nj = norm(block[j]);
        if (nj <= 1e-10 * std::max(n0, 1e-300)) {
            // Invariant subspace reached in this direction; continue with a
            // random direction orthogonal to everything so far.
            Field r = smooth_random_field(block[j].grid(), seed++);
            if (restrict) r = restrict(r);
            for (int pass = 0; pass < 2; ++pass) {
                for (const auto& q : basis) r.axpy(-inner(q, r), q);
                for (int i = 0; i < j; ++i) r.axpy(-inner(block[i], r), block[i]);
            }
            block[j] = (1.0 / norm(r)) * r;
            R(j, j) = 0.0;
            continue;
        }
        R(j, j) = nj;
        block[j] *= 1.0 / nj;
    }
    return R;
}

} // namespace

EigenResult lowest_eigenpairs(const LinearOp& A, const Grid& g, int k, const EigenOptions& opts) {
    if (k < 1) throw ContractViolation("eigensolver: need at least one eigenpair");
    const int b = std::max(1, opts.block_size);
    const int m = std::max(opts.max_basis, k + 3 * b);
    const double asym = symmetry_defect(A, g, opts.symmetry_probes, opts.seed ^ 0x5bd1e995ull, opts.restrict);
    if (asym > opts.symmetry_tol) {
        std::ostringstream ss;
        ss << "eigensolver: operator is not symmetric (relative defect " << asym << ")";
        throw ContractViolation(ss.str());
    }

    EigenResult res;
    std::uint64_t seed = opts.seed;
    auto applyA = [&](const Field& x) {
        ++res.applications;
        Field y = A(x);
        return opts.restrict ? opts.restrict(y) : y;
    };

    std::vector<Field> V;
    Eigen::MatrixXd H;
    std::vector<Field> block;
    for (int j = 0; j < b; ++j) {
        Field r = smooth_random_field(g, seed++);
        block.push_back(opts.restrict ? opts.restrict(r) : r);
    }
    orthonormalize_block(block, V, seed, opts.restrict);

    Eigen::VectorXd theta;
    Eigen::MatrixXd S;
    for (int restart = 0; restart <= opts.max_restarts; ++restart) {
        // Expand until the basis is full. `block` holds the newest vectors,
        // not yet in V.
        while (true) {
            const int old = static_cast<int>(V.size());
            for (auto& x : block) V.push_back(std::move(x));
            block.clear();
            const int cur = static_cast<int>(V.size());
            Eigen::MatrixXd Hn = Eigen::MatrixXd::Zero(cur, cur);
            if (old > 0) Hn.topLeftCorner(old, old) = H;
            std::vector<Field> W;
            for (int j = old; j < cur; ++j) W.push_back(applyA(V[j]));
            for (int j = old; j < cur; ++j)
                for (int i = 0; i < cur; ++i) {
                    const double h = inner(V[i], W[j - old]);
                    Hn(i, j) = h;
                    if (i < old) Hn(j, i) = h;
                }
            // symmetrize the new diagonal block
            Hn.block(old, old, cur - old, cur - old) =
                0.5 * (Hn.block(old, old, cur - old, cur - old) + Hn.block(old, old, cur - old, cur - old).transpose()).eval();
            H = Hn;
            block = std::move(W);
            // Residual block F = A V_last - V H[:, last]; orthonormalize.
            Eigen::MatrixXd Rf = orthonormalize_block(block, V, seed, opts.restrict);
            if (cur + b > m) {
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
                theta = es.eigenvalues();
                S = es.eigenvectors();
                // residual norms from the Lanczos relation
                Eigen::MatrixXd last = S.bottomRows(cur - old);
                Eigen::MatrixXd F = Rf * last;
                int nconv = 0;
                std::vector<double> hist;
                for (int i = 0; i < k; ++i) {
                    const double r = F.col(i).norm();
                    hist.push_back(theta(i));
                    if (r <= opts.tol * std::max(1.0, std::abs(theta(i)))) ++nconv;
                    else break;
                }
                res.ritz_history.push_back(hist);
                if (nconv >= k || restart == opts.max_restarts) {
                    if (nconv < k) {
                        std::ostringstream ss;
                        ss << "eigensolver: " << nconv << " of " << k << " pairs converged after " << restart
                           << " restarts; lowest Ritz values:";
                        for (double t : hist) ss << ' ' << t;
                        throw SolverFailure(ss.str(), F.col(nconv).norm());
                    }
                    for (int i = 0; i < k; ++i) {
                        Field y(g);
                        for (int j = 0; j < cur; ++j) y.axpy(S(j, i), V[j]);
                        y *= 1.0 / norm(y);
                        res.values.push_back(theta(i));
                        res.residuals.push_back(norm(A(y) - theta(i) * y));
                        res.vectors.push_back(std::move(y));
                    }
                    return res;
                }
                // Thick restart: keep the lowest Ritz vectors plus the residual block.
                const int keep = std::min(cur - b, std::max(k + b, (cur) / 2));
                std::vector<Field> Vn;
                for (int i = 0; i < keep; ++i) {
                    Field y(g);
                    for (int j = 0; j < cur; ++j) y.axpy(S(j, i), V[j]);
                    Vn.push_back(std::move(y));
                }
                // re-orthonormalize kept vectors against round-off
                Vn = orthonormalize(Vn, 0.0);
                Eigen::MatrixXd Hk = Eigen::MatrixXd::Zero(keep, keep);
                for (int i = 0; i < keep; ++i) Hk(i, i) = theta(i);
                V = std::move(Vn);
                H = Hk;
                // block already orthonormal to old V; re-orthogonalize to the new V
                for (int pass = 0; pass < 2; ++pass)
                    for (auto& x : block)
                        for (const auto& q : V) x.axpy(-inner(q, x), q);
                // the arrow couplings H[block, kept] = Rf * S_last are recomputed
                // exactly when A is applied to the block in the next expansion
                block = orthonormalize(block, 0.0);
                while (static_cast<int>(block.size()) < b) {
                    Field r = smooth_random_field(g, seed++);
                    if (opts.restrict) r = opts.restrict(r);
                    std::vector<Field> all = V;
                    all.insert(all.end(), block.begin(), block.end());
                    r = project_out(project_out(r, orthonormalize(all, 0.0)), orthonormalize(all, 0.0));
                    block.push_back((1.0 / norm(r)) * r);
                }
                break;
            }
        }
    }
    throw SolverFailure("eigensolver: restart budget exhausted", 0.0);
}

std::vector<double> principal_angles(const std::vector<Field>& a, const std::vector<Field>& b) {
    auto qa = orthonormalize(a);
    auto qb = orthonormalize(b);
    if (qa.size() > qb.size()) std::swap(qa, qb);
    // Sines of the angles are the singular values of (I - Qb Qb^T) Qa; this
    // stays accurate for tiny angles, unlike acos of the cosines.
    std::vector<Field> resid;
    for (const auto& x : qa) resid.push_back(project_out(x, qb));
    const int p = static_cast<int>(resid.size());
    Eigen::MatrixXd G(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) G(i, j) = inner(resid[i], resid[j]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    std::vector<double> ang;
    for (int i = 0; i < p; ++i) ang.push_back(std::asin(std::clamp(std::sqrt(std::max(es.eigenvalues()(i), 0.0)), 0.0, 1.0)));
    std::sort(ang.begin(), ang.end());
    // directions of the larger span with no partner are orthogonal
    for (std::size_t i = qa.size(); i < qb.size(); ++i) ang.push_back(std::acos(0.0));
    return ang;
}

} // namespace hartree
