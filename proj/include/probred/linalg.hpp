// linalg.hpp
//
// Small dense linear algebra for regression-sized problems (k <= ~20):
//  - Matrix: row-major dense matrix of double
//  - least_squares: Householder QR with column pivoting, rank detection that
//    names the offending column, and (X'X)^{-1} for standard errors
//  - cholesky / solve_spd / spd_inverse for symmetric positive definite work
//
// Problems here are tiny; the implementation favours numerical robustness and
// clear failure modes over speed.

#ifndef PROBRED_LINALG_HPP
#define PROBRED_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "probred/common.hpp"

namespace probred {

class Matrix {
public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    // Matrix * vector
    std::vector<double> operator*(const std::vector<double>& v) const {
        detail::require(v.size() == cols_, "matrix-vector size mismatch");
        std::vector<double> out(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) acc += (*this)(i, j) * v[j];
            out[i] = acc;
        }
        return out;
    }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

private:
    std::size_t rows_, cols_;
    std::vector<double> data_;
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
    detail::require(a.cols() == b.rows(), "matrix-matrix size mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    detail::require(a.size() == b.size(), "dot: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

// Result of a least-squares solve. `xtx_inverse` is (X'X)^{-1} in the original
// column order, the piece standard errors and restriction tests need.
struct LeastSquaresResult {
    std::vector<double> coefficients;
    Matrix xtx_inverse;
};

// Least squares via Householder QR with column pivoting (Businger-Golub).
//
// Rank deficiency is detected when a pivot element falls below
// `pivot_tol` times the largest pivot; the error names the offending column
// using `column_names` (indices are used when no names are supplied).
inline LeastSquaresResult least_squares(const Matrix& X, const std::vector<double>& y,
                                        const std::vector<std::string>& column_names = {},
                                        double pivot_tol = 1e-10) {
    const std::size_t n = X.rows(), k = X.cols();
    detail::require(y.size() == n, "least_squares: y length != rows");
    detail::require(n > k, "least_squares: need more rows than parameters");

    // Working copies: A is factored in place, qty accumulates Q'y.
    Matrix A = X;
    std::vector<double> qty = y;
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);

    // Remaining squared column norms, used to select pivots.
    std::vector<double> colnorm2(k, 0.0);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < n; ++i) colnorm2[j] += A(i, j) * A(i, j);

    auto name_of = [&](std::size_t original_index) {
        if (original_index < column_names.size()) return column_names[original_index];
        return "column " + std::to_string(original_index);
    };

    double largest_pivot = 0.0;
    for (std::size_t step = 0; step < k; ++step) {
        // Pivot: bring the remaining column with the largest norm forward.
        std::size_t best = step;
        for (std::size_t j = step + 1; j < k; ++j)
            if (colnorm2[j] > colnorm2[best]) best = j;
        if (best != step) {
            for (std::size_t i = 0; i < n; ++i) std::swap(A(i, step), A(i, best));
            std::swap(colnorm2[step], colnorm2[best]);
            std::swap(perm[step], perm[best]);
        }

        // Householder reflection annihilating A(step+1..n-1, step).
        double norm = 0.0;
        for (std::size_t i = step; i < n; ++i) norm += A(i, step) * A(i, step);
        norm = std::sqrt(norm);

        if (largest_pivot == 0.0) largest_pivot = norm;
        if (norm <= pivot_tol * largest_pivot)
            throw Error("design matrix is rank deficient: " + name_of(perm[step]) +
                        " is collinear with preceding columns");
        largest_pivot = std::max(largest_pivot, norm);

        const double alpha = (A(step, step) >= 0.0) ? -norm : norm;
        std::vector<double> v(n - step);
        v[0] = A(step, step) - alpha;
        for (std::size_t i = step + 1; i < n; ++i) v[i - step] = A(i, step);
        double vnorm2 = 0.0;
        for (double value : v) vnorm2 += value * value;

        A(step, step) = alpha;
        for (std::size_t i = step + 1; i < n; ++i) A(i, step) = 0.0;

        if (vnorm2 > 0.0) {
            // Apply I - 2 v v'/(v'v) to the trailing columns and to qty.
            for (std::size_t j = step + 1; j < k; ++j) {
                double proj = 0.0;
                for (std::size_t i = step; i < n; ++i) proj += v[i - step] * A(i, j);
                proj *= 2.0 / vnorm2;
                for (std::size_t i = step; i < n; ++i) A(i, j) -= proj * v[i - step];
            }
            double proj = 0.0;
            for (std::size_t i = step; i < n; ++i) proj += v[i - step] * qty[i];
            proj *= 2.0 / vnorm2;
            for (std::size_t i = step; i < n; ++i) qty[i] -= proj * v[i - step];
        }

        // Downdate remaining column norms.
        for (std::size_t j = step + 1; j < k; ++j) {
            colnorm2[j] -= A(step, j) * A(step, j);
            if (colnorm2[j] < 0.0) colnorm2[j] = 0.0;
        }
    }

    // Back-substitute R b = Q'y (permuted order).
    std::vector<double> bp(k, 0.0);
    for (std::size_t i = k; i-- > 0;) {
        double acc = qty[i];
        for (std::size_t j = i + 1; j < k; ++j) acc -= A(i, j) * bp[j];
        bp[i] = acc / A(i, i);
    }

    // R^{-1} by back-substitution on the identity, then
    // (X'X)^{-1} = P R^{-1} R^{-T} P' back in original column order.
    Matrix rinv(k, k);
    for (std::size_t col = 0; col < k; ++col) {
        for (std::size_t i = k; i-- > 0;) {
            double acc = (i == col) ? 1.0 : 0.0;
            for (std::size_t j = i + 1; j < k; ++j) acc -= A(i, j) * rinv(j, col);
            rinv(i, col) = acc / A(i, i);
        }
    }

    LeastSquaresResult out;
    out.coefficients.assign(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) out.coefficients[perm[i]] = bp[i];

    out.xtx_inverse = Matrix(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            double acc = 0.0;
            for (std::size_t l = std::max(i, j); l < k; ++l) acc += rinv(i, l) * rinv(j, l);
            out.xtx_inverse(perm[i], perm[j]) = acc;
        }
    return out;
}

// Cholesky factor L (lower triangular, A = L L') of a symmetric positive
// definite matrix. Pivots at or below `tol` times the largest diagonal entry
// are treated as failure.
inline Matrix cholesky(const Matrix& A, double tol = 1e-10) {
    const std::size_t n = A.rows();
    detail::require(A.cols() == n, "cholesky: matrix not square");
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::fabs(A(i, i)));

    Matrix L(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double diag = A(j, j);
        for (std::size_t l = 0; l < j; ++l) diag -= L(j, l) * L(j, l);
        if (!(diag > tol * max_diag))
            throw Error("matrix is not positive definite (pivot " + std::to_string(j) + ")");
        L(j, j) = std::sqrt(diag);
        for (std::size_t i = j + 1; i < n; ++i) {
            double acc = A(i, j);
            for (std::size_t l = 0; l < j; ++l) acc -= L(i, l) * L(j, l);
            L(i, j) = acc / L(j, j);
        }
    }
    return L;
}

// Solve A x = b for symmetric positive definite A via Cholesky.
inline std::vector<double> solve_spd(const Matrix& A, const std::vector<double>& b,
                                     double tol = 1e-10) {
    const Matrix L = cholesky(A, tol);
    const std::size_t n = A.rows();
    detail::require(b.size() == n, "solve_spd: size mismatch");
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = b[i];
        for (std::size_t j = 0; j < i; ++j) acc -= L(i, j) * z[j];
        z[i] = acc / L(i, i);
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double acc = z[i];
        for (std::size_t j = i + 1; j < n; ++j) acc -= L(j, i) * x[j];
        x[i] = acc / L(i, i);
    }
    return x;
}

// Solve a general square system by Gaussian elimination with partial
// pivoting. Used for the bordered (KKT) systems of restricted least squares,
// which are symmetric but indefinite.
inline std::vector<double> solve_general(Matrix A, std::vector<double> b, double tol = 1e-12) {
    const std::size_t n = A.rows();
    detail::require(A.cols() == n && b.size() == n, "solve_general: size mismatch");
    double max_entry = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) max_entry = std::max(max_entry, std::fabs(A(i, j)));

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t i = col + 1; i < n; ++i)
            if (std::fabs(A(i, col)) > std::fabs(A(piv, col))) piv = i;
        if (std::fabs(A(piv, col)) <= tol * max_entry)
            throw Error("linear system is singular");
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(A(col, j), A(piv, j));
            std::swap(b[col], b[piv]);
        }
        for (std::size_t i = col + 1; i < n; ++i) {
            const double factor = A(i, col) / A(col, col);
            if (factor == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) A(i, j) -= factor * A(col, j);
            b[i] -= factor * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double acc = b[i];
        for (std::size_t j = i + 1; j < n; ++j) acc -= A(i, j) * x[j];
        x[i] = acc / A(i, i);
    }
    return x;
}

}  // namespace probred

#endif  // PROBRED_LINALG_HPP
