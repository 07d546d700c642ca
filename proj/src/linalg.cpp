#include "reso/linalg.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include <lapacke.h>

namespace reso {

namespace {

lapack_complex_double* zptr(cd* p) { return reinterpret_cast<lapack_complex_double*>(p); }
const lapack_complex_double* zptr(const cd* p) { return reinterpret_cast<const lapack_complex_double*>(p); }

}  // namespace

void ComplexLU::factor(const CMat& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("ComplexLU: matrix not square");
    lu_ = a;
    const int n = static_cast<int>(a.rows());
    piv_.assign(n, 0);
    int info = LAPACKE_zgetrf(LAPACK_COL_MAJOR, n, n, zptr(lu_.data()), n, piv_.data());
    if (info < 0) throw std::runtime_error("zgetrf: illegal argument");
    singular_ = info > 0;
}

CMat ComplexLU::solve(const CMat& b) const {
    CMat x = b;
    const int n = static_cast<int>(lu_.rows());
    int info = LAPACKE_zgetrs(LAPACK_COL_MAJOR, 'N', n, static_cast<int>(x.cols()), zptr(lu_.data()), n,
                              piv_.data(), zptr(x.data()), n);
    if (info != 0) throw std::runtime_error("zgetrs failed");
    return x;
}

CVec ComplexLU::solve(const CVec& b) const {
    CMat x = solve(CMat(b));
    return x.col(0);
}

CVec ComplexLU::solve_adjoint(const CVec& b) const {
    CVec x = b;
    const int n = static_cast<int>(lu_.rows());
    int info = LAPACKE_zgetrs(LAPACK_COL_MAJOR, 'C', n, 1, zptr(lu_.data()), n, piv_.data(), zptr(x.data()), n);
    if (info != 0) throw std::runtime_error("zgetrs failed");
    return x;
}

void RealLU::factor(const Mat& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("RealLU: matrix not square");
    lu_ = a;
    const int n = static_cast<int>(a.rows());
    piv_.assign(n, 0);
    int info = LAPACKE_dgetrf(LAPACK_COL_MAJOR, n, n, lu_.data(), n, piv_.data());
    if (info < 0) throw std::runtime_error("dgetrf: illegal argument");
    singular_ = info > 0;
}

Mat RealLU::solve(const Mat& b) const {
    Mat x = b;
    const int n = static_cast<int>(lu_.rows());
    int info = LAPACKE_dgetrs(LAPACK_COL_MAJOR, 'N', n, static_cast<int>(x.cols()), lu_.data(), n, piv_.data(),
                              x.data(), n);
    if (info != 0) throw std::runtime_error("dgetrs failed");
    return x;
}

Vec RealLU::solve(const Vec& b) const {
    Mat x = solve(Mat(b));
    return x.col(0);
}

SingularPair smallest_singular_svd(const CMat& a) {
    const int m = static_cast<int>(a.rows());
    const int n = static_cast<int>(a.cols());
    if (m != n) throw std::invalid_argument("smallest_singular_svd: square input expected");
    CMat work = a;
    Vec s(n);
    CMat u(n, n), vt(n, n);
    int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'S', m, n, zptr(work.data()), m, s.data(), zptr(u.data()), m,
                              zptr(vt.data()), n);
    if (info != 0) throw std::runtime_error("zgesdd failed");
    SingularPair out;
    out.sigma = s(n - 1);
    out.right = vt.row(n - 1).adjoint();
    return out;
}

SingularPair smallest_singular_inverse(const CMat& a, int iters) {
    const Eigen::Index n = a.rows();
    ComplexLU lu(a);
    SingularPair out;
    if (lu.singular()) {
        // Exact zero pivot: recover a null vector from the triangular factor is overkill here.
        out.sigma = 0.0;
        out.right = CVec::Zero(n);
        out.right(0) = 1.0;
        return out;
    }
    CVec x = CVec::Ones(n) / std::sqrt(static_cast<double>(n));
    for (Eigen::Index i = 0; i < n; ++i) x(i) *= cd(1.0 + 0.01 * std::sin(1.0 + i), 0.01 * std::cos(2.0 + i));
    x.normalize();
    for (int it = 0; it < iters; ++it) {
        CVec y = lu.solve_adjoint(x);
        CVec z = lu.solve(y);
        x = z / z.norm();
    }
    out.sigma = (a * x).norm();
    out.right = x;
    return out;
}

void symmetric_eigen(const Mat& a, Vec& values, Mat& vectors) {
    const int n = static_cast<int>(a.rows());
    vectors = a;
    Vec w(n);
    int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, vectors.data(), n, w.data());
    if (info != 0) throw std::runtime_error("dsyevd failed");
    values = w.reverse();
    vectors = vectors.rowwise().reverse().eval();
}

void general_eigen(const Mat& a, CVec& values, CMat& vectors) {
    const int n = static_cast<int>(a.rows());
    Mat work = a;
    Vec wr(n), wi(n);
    Mat vr(n, n);
    int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'V', n, work.data(), n, wr.data(), wi.data(), nullptr, n,
                             vr.data(), n);
    if (info != 0) throw std::runtime_error("dgeev failed");
    values.resize(n);
    vectors.resize(n, n);
    for (int j = 0; j < n; ++j) {
        if (wi(j) == 0.0) {
            values(j) = cd(wr(j), 0.0);
            vectors.col(j) = vr.col(j).cast<cd>();
        } else {
            values(j) = cd(wr(j), wi(j));
            values(j + 1) = cd(wr(j + 1), wi(j + 1));
            for (int i = 0; i < n; ++i) {
                vectors(i, j) = cd(vr(i, j), vr(i, j + 1));
                vectors(i, j + 1) = cd(vr(i, j), -vr(i, j + 1));
            }
            ++j;
        }
    }
}

}  // namespace reso
