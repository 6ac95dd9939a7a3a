// Sparse LU, the complex shifted Laplacian preconditioner
// A - i*beta*M, and restarted GMRES for complex systems.
//
// Solver objects are not safe to share between threads; distinct instances
// on distinct data are independent.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <memory>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "sparse.hpp"

namespace igarad {

class SingularMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline double norm2(std::span<const cplx> v)
{
    double s = 0.0;
    for (const auto& x : v)
        s += std::norm(x);
    return std::sqrt(s);
}

/// Sparse LU with COLAMD fill-reducing ordering.
class SparseLu {
public:
    SparseLu() = default;
    explicit SparseLu(const SparseComplex& A) { factor(A); }

    void factor(const SparseComplex& A)
    {
        if (A.rows() != A.cols())
            throw std::invalid_argument("SparseLu: matrix must be square");
        n_ = A.rows();
        std::vector<Eigen::Triplet<cplx>> trips;
        trips.reserve(A.nnz());
        for (int r = 0; r < A.rows(); ++r)
            for (auto p = A.row_offsets()[r]; p < A.row_offsets()[r + 1]; ++p)
                trips.emplace_back(r, A.col_indices()[p], A.values()[p]);
        Matrix mat(n_, n_);
        mat.setFromTriplets(trips.begin(), trips.end());
        mat.makeCompressed();
        lu_ = std::make_unique<Solver>();
        lu_->analyzePattern(mat);
        lu_->factorize(mat);
        if (lu_->info() != Eigen::Success) {
            std::ostringstream msg;
            msg << "SparseLu: factorization failed: " << lu_->lastErrorMessage();
            throw SingularMatrixError(msg.str());
        }
    }

    [[nodiscard]] int size() const noexcept { return n_; }

    void solve(std::span<const cplx> b, std::span<cplx> x) const
    {
        if (!lu_)
            throw std::logic_error("SparseLu: not factorized");
        if (static_cast<int>(b.size()) != n_ || static_cast<int>(x.size()) != n_)
            throw std::invalid_argument("SparseLu::solve: dimension mismatch");
        const Eigen::Map<const Eigen::VectorXcd> rhs(b.data(), n_);
        Eigen::Map<Eigen::VectorXcd> out(x.data(), n_);
        out = lu_->solve(rhs);
    }

    [[nodiscard]] std::vector<cplx> solve(std::span<const cplx> b) const
    {
        std::vector<cplx> x(b.size());
        solve(b, x);
        return x;
    }

private:
    using Matrix = Eigen::SparseMatrix<cplx, Eigen::ColMajor>;
    using Solver = Eigen::SparseLU<Matrix, Eigen::COLAMDOrdering<int>>;
    int n_ = 0;
    std::unique_ptr<Solver> lu_;
};

/// Sparse direct solve of A x = b.
inline std::vector<cplx> direct_solve(const SparseComplex& A, std::span<const cplx> b)
{
    return SparseLu(A).solve(b);
}

/// Approximate inverse used by GMRES: any type with apply(in, out).
template <typename P>
concept Preconditioner = requires(const P& p, std::span<const cplx> in, std::span<cplx> out) { p.apply(in, out); };

struct IdentityPreconditioner {
    void apply(std::span<const cplx> in, std::span<cplx> out) const { std::copy(in.begin(), in.end(), out.begin()); }
};

/// Complex shifted Laplacian A - i*beta*M, applied through an exact sparse LU.
class CslpPreconditioner {
public:
    CslpPreconditioner(const SparseComplex& A, const SparseReal& M, double beta) : beta_(beta)
    {
        if (A.rows() != M.rows() || A.cols() != M.cols())
            throw std::invalid_argument("CslpPreconditioner: A and M dimensions differ");
        if (beta < 0.0)
            throw std::invalid_argument("CslpPreconditioner: beta must be >= 0");
        std::vector<Triplet<cplx>> t;
        t.reserve(A.nnz() + M.nnz());
        for (int r = 0; r < A.rows(); ++r) {
            for (auto p = A.row_offsets()[r]; p < A.row_offsets()[r + 1]; ++p)
                t.push_back({r, A.col_indices()[p], A.values()[p]});
            for (auto p = M.row_offsets()[r]; p < M.row_offsets()[r + 1]; ++p)
                t.push_back({r, M.col_indices()[p], cplx(0.0, -beta) * M.values()[p]});
        }
        shifted_ = SparseComplex::from_triplets(A.rows(), A.cols(), std::move(t));
        lu_.factor(shifted_);
    }

    [[nodiscard]] double beta() const noexcept { return beta_; }
    [[nodiscard]] const SparseComplex& matrix() const noexcept { return shifted_; }

    void apply(std::span<const cplx> in, std::span<cplx> out) const { lu_.solve(in, out); }

private:
    double beta_;
    SparseComplex shifted_;
    SparseLu lu_;
};

inline CslpPreconditioner build_cslp(const SparseComplex& A, const SparseReal& M, double beta)
{
    return {A, M, beta};
}

/// Shift beta = factor / k; factor 1/3 gives the O(1/k) shift used for the radiation runs.
inline double cslp_shift(double k, double factor = 1.0 / 3.0) { return factor / k; }

enum class PreconditionSide { Left, Right };

struct GmresConfig {
    int restart = 50;
    double tol = 1e-8;
    int max_outer = 50;
    PreconditionSide side = PreconditionSide::Left;

    void validate() const
    {
        if (restart < 1)
            throw std::invalid_argument("GmresConfig: restart must be >= 1");
        if (!(tol > 0.0))
            throw std::invalid_argument("GmresConfig: tol must be positive");
        if (max_outer < 1)
            throw std::invalid_argument("GmresConfig: max_outer must be >= 1");
    }
};

struct SolveReport {
    int outer_iterations = 0;
    int inner_iterations = 0;
    /// ||P^{-1}(b - A x)|| / ||P^{-1} b|| for left preconditioning, true residual for right.
    double preconditioned_residual = 0.0;
    double true_residual = 0.0; ///< ||b - A x|| / ||b||
    double seconds = 0.0;
    bool converged = false;
    std::vector<double> residual_history; ///< relative residual estimate after each inner step
    std::string method = "gmres";
};

// Restarted GMRES with modified Gram-Schmidt and complex Givens rotations.
// Left preconditioning solves P^{-1} A x = P^{-1} b and monitors the
// preconditioned residual. Non-convergence is reported through
// SolveReport::converged and the last iterate is returned.
template <Preconditioner P>
std::pair<std::vector<cplx>, SolveReport> gmres(const SparseComplex& A, std::span<const cplx> b, const P& precond,
                                                const GmresConfig& cfg = {})
{
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const int n = A.rows();
    if (A.cols() != n || static_cast<int>(b.size()) != n)
        throw std::invalid_argument("gmres: dimension mismatch");
    const bool left = cfg.side == PreconditionSide::Left;

    SolveReport rep;
    std::vector<cplx> x(static_cast<std::size_t>(n), cplx{});
    std::vector<cplx> tmp(x.size()), w(x.size()), r(x.size());

    auto residual = [&](std::vector<cplx>& out) {
        A.multiply<cplx, cplx>(x, tmp);
        for (int i = 0; i < n; ++i)
            tmp[i] = b[i] - tmp[i];
        if (left)
            precond.apply(tmp, out);
        else
            out = tmp;
    };

    double bnorm;
    if (left) {
        precond.apply(b, w);
        bnorm = norm2(w);
    } else {
        bnorm = norm2(b);
    }
    const double bnorm_true = norm2(b);
    if (bnorm == 0.0) {
        rep.converged = true;
        rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return {x, rep};
    }

    const int mdim = cfg.restart;
    std::vector<std::vector<cplx>> V(static_cast<std::size_t>(mdim + 1), std::vector<cplx>(x.size()));
    std::vector<cplx> H(static_cast<std::size_t>((mdim + 1) * mdim));
    auto h = [&](int i, int j) -> cplx& { return H[static_cast<std::size_t>(i * mdim + j)]; };
    std::vector<double> cs(static_cast<std::size_t>(mdim));
    std::vector<cplx> sn(static_cast<std::size_t>(mdim)), g(static_cast<std::size_t>(mdim + 1));

    double rel = 1.0;
    for (int outer = 0; outer < cfg.max_outer; ++outer) {
        residual(r);
        const double beta = norm2(r);
        rel = beta / bnorm;
        if (rel <= cfg.tol) {
            rep.converged = true;
            break;
        }
        ++rep.outer_iterations;
        for (int i = 0; i < n; ++i)
            V[0][i] = r[i] / beta;
        std::fill(g.begin(), g.end(), cplx{});
        g[0] = beta;

        int j = 0;
        for (; j < mdim; ++j) {
            // w = P^{-1} A v_j  (left)  or  A P^{-1} v_j  (right)
            if (left) {
                A.multiply<cplx, cplx>(V[j], tmp);
                precond.apply(tmp, w);
            } else {
                precond.apply(V[j], tmp);
                A.multiply<cplx, cplx>(tmp, w);
            }
            for (int i = 0; i <= j; ++i) {
                cplx dot{};
                for (int l = 0; l < n; ++l)
                    dot += std::conj(V[i][l]) * w[l];
                h(i, j) = dot;
                for (int l = 0; l < n; ++l)
                    w[l] -= dot * V[i][l];
            }
            const double wn = norm2(w);
            h(j + 1, j) = wn;
            if (wn > 0.0)
                for (int l = 0; l < n; ++l)
                    V[j + 1][l] = w[l] / wn;

            for (int i = 0; i < j; ++i) {
                const cplx a = h(i, j), bb = h(i + 1, j);
                h(i, j) = cs[i] * a + sn[i] * bb;
                h(i + 1, j) = -std::conj(sn[i]) * a + cs[i] * bb;
            }
            const cplx a = h(j, j), bb = h(j + 1, j);
            const double rho = std::sqrt(std::norm(a) + std::norm(bb));
            if (std::abs(a) == 0.0) {
                cs[j] = 0.0;
                sn[j] = 1.0;
            } else {
                cs[j] = std::abs(a) / rho;
                sn[j] = (a / std::abs(a)) * std::conj(bb) / rho;
            }
            h(j, j) = cs[j] * a + sn[j] * bb;
            h(j + 1, j) = 0.0;
            g[j + 1] = -std::conj(sn[j]) * g[j];
            g[j] = cs[j] * g[j];

            ++rep.inner_iterations;
            rel = std::abs(g[j + 1]) / bnorm;
            rep.residual_history.push_back(rel);
            if (rel <= cfg.tol || wn == 0.0) {
                ++j;
                break;
            }
        }

        // back substitution for the least-squares coefficients
        std::vector<cplx> y(static_cast<std::size_t>(j));
        for (int i = j - 1; i >= 0; --i) {
            cplx s = g[i];
            for (int l = i + 1; l < j; ++l)
                s -= h(i, l) * y[l];
            y[i] = s / h(i, i);
        }
        std::fill(w.begin(), w.end(), cplx{});
        for (int i = 0; i < j; ++i)
            for (int l = 0; l < n; ++l)
                w[l] += y[i] * V[i][l];
        if (left) {
            for (int l = 0; l < n; ++l)
                x[l] += w[l];
        } else {
            precond.apply(w, tmp);
            for (int l = 0; l < n; ++l)
                x[l] += tmp[l];
        }
    }

    residual(r);
    rep.preconditioned_residual = norm2(r) / bnorm;
    rep.converged = rep.converged || rep.preconditioned_residual <= cfg.tol;
    A.multiply<cplx, cplx>(x, tmp);
    for (int i = 0; i < n; ++i)
        tmp[i] = b[i] - tmp[i];
    rep.true_residual = norm2(tmp) / bnorm_true;
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(x), std::move(rep)};
}

} // namespace igarad
