#include "qrep/matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace qrep {

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, cxd(0.0, 0.0)) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::initializer_list<cxd> entries)
    : rows_(rows), cols_(cols), data_(entries) {
    if (data_.size() != rows * cols) {
        throw std::invalid_argument("Matrix initializer size does not match dimensions");
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

Matrix Matrix::diagonal(const std::vector<cxd>& diag) {
    Matrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) {
        m(i, i) = diag[i];
    }
    return m;
}

Matrix Matrix::adjoint() const {
    Matrix m(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            m(c, r) = std::conj((*this)(r, c));
        }
    }
    return m;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
    if (cols_ != rhs.rows_) {
        throw std::invalid_argument("Matrix product dimension mismatch");
    }
    Matrix m(rows_, rhs.cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t k = 0; k < cols_; ++k) {
            const cxd v = (*this)(r, k);
            if (v == cxd(0.0, 0.0)) continue;
            for (std::size_t c = 0; c < rhs.cols_; ++c) {
                m(r, c) += v * rhs(k, c);
            }
        }
    }
    return m;
}

Matrix Matrix::operator*(cxd scalar) const {
    Matrix m = *this;
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            m(r, c) *= scalar;
        }
    }
    return m;
}

bool Matrix::is_unitary(double tol) const {
    if (rows_ != cols_) return false;
    Matrix prod = adjoint() * (*this);
    return prod.max_abs_diff(identity(rows_)) <= tol;
}

double Matrix::max_abs_diff(const Matrix& other) const {
    if (rows_ != other.rows_ || cols_ != other.cols_) {
        throw std::invalid_argument("Matrix comparison dimension mismatch");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) {
        worst = std::max(worst, std::abs(data_[i] - other.data_[i]));
    }
    return worst;
}

cxd Matrix::trace() const {
    cxd t = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) {
        t += (*this)(i, i);
    }
    return t;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix m(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t ar = 0; ar < a.rows(); ++ar) {
        for (std::size_t ac = 0; ac < a.cols(); ++ac) {
            for (std::size_t br = 0; br < b.rows(); ++br) {
                for (std::size_t bc = 0; bc < b.cols(); ++bc) {
                    m(ar * b.rows() + br, ac * b.cols() + bc) = a(ar, ac) * b(br, bc);
                }
            }
        }
    }
    return m;
}

}  // namespace qrep
