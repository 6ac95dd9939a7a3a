// Compressed sparse row storage with sorted, deduplicated columns.
#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace igarad {

using cplx = std::complex<double>;

template <typename T>
struct Triplet {
    int row;
    int col;
    T value;
};

template <typename T>
class CsrMatrix {
public:
    using value_type = T;

    CsrMatrix() = default;
    CsrMatrix(int rows, int cols) : rows_(rows), cols_(cols), row_offsets_(static_cast<std::size_t>(rows) + 1, 0) {}

    /// Raw CSR arrays; columns must be sorted and unique within each row.
    CsrMatrix(int rows, int cols, std::vector<std::int64_t> offsets, std::vector<int> columns, std::vector<T> values)
        : rows_(rows), cols_(cols), row_offsets_(std::move(offsets)), col_indices_(std::move(columns)),
          values_(std::move(values))
    {
        if (row_offsets_.size() != static_cast<std::size_t>(rows_) + 1 || col_indices_.size() != values_.size()
            || static_cast<std::size_t>(row_offsets_.back()) != values_.size())
            throw std::invalid_argument("CsrMatrix: inconsistent CSR arrays");
        for (int r = 0; r < rows_; ++r)
            for (auto p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p) {
                if (col_indices_[p] < 0 || col_indices_[p] >= cols_)
                    throw std::invalid_argument("CsrMatrix: column index out of range");
                if (p > row_offsets_[r] && col_indices_[p] <= col_indices_[p - 1])
                    throw std::invalid_argument("CsrMatrix: columns must be sorted and unique");
            }
    }

    /// Duplicates are summed.
    static CsrMatrix from_triplets(int rows, int cols, std::vector<Triplet<T>> trips)
    {
        for (const auto& t : trips)
            if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
                throw std::invalid_argument("CsrMatrix::from_triplets: index out of range");
        std::sort(trips.begin(), trips.end(),
                  [](const auto& a, const auto& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
        CsrMatrix m(rows, cols);
        for (std::size_t i = 0; i < trips.size(); ++i) {
            if (i > 0 && trips[i].row == trips[i - 1].row && trips[i].col == trips[i - 1].col) {
                m.values_.back() += trips[i].value;
                continue;
            }
            m.col_indices_.push_back(trips[i].col);
            m.values_.push_back(trips[i].value);
            ++m.row_offsets_[static_cast<std::size_t>(trips[i].row) + 1];
        }
        std::partial_sum(m.row_offsets_.begin(), m.row_offsets_.end(), m.row_offsets_.begin());
        return m;
    }

    static CsrMatrix identity(int n)
    {
        std::vector<Triplet<T>> t;
        for (int i = 0; i < n; ++i)
            t.push_back({i, i, T(1)});
        return from_triplets(n, n, std::move(t));
    }

    [[nodiscard]] int rows() const noexcept { return rows_; }
    [[nodiscard]] int cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t nnz() const noexcept { return values_.size(); }
    [[nodiscard]] std::span<const std::int64_t> row_offsets() const noexcept { return row_offsets_; }
    [[nodiscard]] std::span<const int> col_indices() const noexcept { return col_indices_; }
    [[nodiscard]] std::span<const T> values() const noexcept { return values_; }
    [[nodiscard]] std::span<T> values() noexcept { return values_; }

    /// Entry (r,c), zero if not stored.
    [[nodiscard]] T at(int r, int c) const
    {
        const auto first = col_indices_.begin() + row_offsets_[r];
        const auto last = col_indices_.begin() + row_offsets_[r + 1];
        const auto it = std::lower_bound(first, last, c);
        if (it == last || *it != c)
            return T(0);
        return values_[static_cast<std::size_t>(it - col_indices_.begin())];
    }

    /// Position of stored entry (r,c) in values(), or -1.
    [[nodiscard]] std::int64_t find(int r, int c) const
    {
        const auto first = col_indices_.begin() + row_offsets_[r];
        const auto last = col_indices_.begin() + row_offsets_[r + 1];
        const auto it = std::lower_bound(first, last, c);
        if (it == last || *it != c)
            return -1;
        return it - col_indices_.begin();
    }

    /// y = this * x
    template <typename U, typename V>
    void multiply(std::span<const U> x, std::span<V> y) const
    {
        if (static_cast<int>(x.size()) != cols_ || static_cast<int>(y.size()) != rows_)
            throw std::invalid_argument("CsrMatrix::multiply: dimension mismatch");
        for (int r = 0; r < rows_; ++r) {
            V sum{};
            for (auto p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p)
                sum += values_[p] * x[col_indices_[p]];
            y[r] = sum;
        }
    }

    template <typename U>
    [[nodiscard]] std::vector<decltype(T{} * U{})> operator*(const std::vector<U>& x) const
    {
        std::vector<decltype(T{} * U{})> y(static_cast<std::size_t>(rows_));
        multiply<U, decltype(T{} * U{})>(x, y);
        return y;
    }

    [[nodiscard]] CsrMatrix transpose() const
    {
        std::vector<Triplet<T>> t;
        t.reserve(nnz());
        for (int r = 0; r < rows_; ++r)
            for (auto p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p)
                t.push_back({col_indices_[p], r, values_[p]});
        return from_triplets(cols_, rows_, std::move(t));
    }

    /// Submatrix with the given (sorted or unsorted) row and column index lists.
    [[nodiscard]] CsrMatrix extract(std::span<const int> row_ids, std::span<const int> col_ids) const
    {
        std::vector<int> col_map(static_cast<std::size_t>(cols_), -1);
        for (std::size_t c = 0; c < col_ids.size(); ++c)
            col_map[col_ids[c]] = static_cast<int>(c);
        std::vector<Triplet<T>> t;
        for (std::size_t r = 0; r < row_ids.size(); ++r) {
            const int src = row_ids[r];
            for (auto p = row_offsets_[src]; p < row_offsets_[src + 1]; ++p) {
                const int c = col_map[col_indices_[p]];
                if (c >= 0)
                    t.push_back({static_cast<int>(r), c, values_[p]});
            }
        }
        return from_triplets(static_cast<int>(row_ids.size()), static_cast<int>(col_ids.size()), std::move(t));
    }

    /// Largest stored entry magnitude.
    [[nodiscard]] double max_abs() const
    {
        double m = 0.0;
        for (const auto& v : values_)
            m = std::max(m, static_cast<double>(std::abs(v)));
        return m;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<std::int64_t> row_offsets_{0};
    std::vector<int> col_indices_;
    std::vector<T> values_;
};

using SparseReal = CsrMatrix<double>;
using SparseComplex = CsrMatrix<cplx>;

/// alpha*X + beta*Y + gamma*Z on the union pattern; all three must share dimensions.
inline SparseComplex linear_combination(cplx alpha, const SparseReal& X, cplx beta, const SparseReal& Y, cplx gamma,
                                        const SparseReal& Z)
{
    if (X.rows() != Y.rows() || X.rows() != Z.rows() || X.cols() != Y.cols() || X.cols() != Z.cols())
        throw std::invalid_argument("linear_combination: dimension mismatch");
    std::vector<Triplet<cplx>> t;
    t.reserve(X.nnz() + Y.nnz() + Z.nnz());
    auto add = [&t](cplx s, const SparseReal& A) {
        for (int r = 0; r < A.rows(); ++r)
            for (auto p = A.row_offsets()[r]; p < A.row_offsets()[r + 1]; ++p)
                t.push_back({r, A.col_indices()[p], s * A.values()[p]});
    };
    add(alpha, X);
    add(beta, Y);
    add(gamma, Z);
    return SparseComplex::from_triplets(X.rows(), X.cols(), std::move(t));
}

inline SparseComplex to_complex(const SparseReal& A)
{
    std::vector<cplx> v(A.values().begin(), A.values().end());
    return SparseComplex(A.rows(), A.cols(), {A.row_offsets().begin(), A.row_offsets().end()},
                         {A.col_indices().begin(), A.col_indices().end()}, std::move(v));
}

/// max |A_ij - A_ji| over stored entries of both.
template <typename T>
double symmetry_defect(const CsrMatrix<T>& A, bool conjugate = false)
{
    double d = 0.0;
    for (int r = 0; r < A.rows(); ++r)
        for (auto p = A.row_offsets()[r]; p < A.row_offsets()[r + 1]; ++p) {
            const int c = A.col_indices()[p];
            T other = A.at(c, r);
            if constexpr (!std::is_floating_point_v<T>)
                if (conjugate)
                    other = std::conj(other);
            d = std::max(d, static_cast<double>(std::abs(A.values()[p] - other)));
        }
    return d;
}

} // namespace igarad
