#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace qrep {

using cxd = std::complex<double>;

/// Dense complex matrix, row-major. Sized for gate algebra on small
/// registers (dims up to a few hundred), not for large linear algebra.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols);
    Matrix(std::size_t rows, std::size_t cols, std::initializer_list<cxd> entries);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(const std::vector<cxd>& diag);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    cxd& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const cxd& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    Matrix adjoint() const;
    Matrix operator*(const Matrix& rhs) const;
    Matrix operator*(cxd scalar) const;

    bool is_unitary(double tol) const;
    double max_abs_diff(const Matrix& other) const;
    cxd trace() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cxd> data_;
};

Matrix kron(const Matrix& a, const Matrix& b);

}  // namespace qrep
