#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace reso {

using cd = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

/// Dense complex LU (LAPACK getrf/getrs). Keeps its own copy of the factors.
class ComplexLU {
public:
    ComplexLU() = default;
    explicit ComplexLU(const CMat& a) { factor(a); }

    void factor(const CMat& a);
    CVec solve(const CVec& b) const;
    CMat solve(const CMat& b) const;
    /// Solves A^H x = b.
    CVec solve_adjoint(const CVec& b) const;
    bool singular() const { return singular_; }
    Eigen::Index size() const { return lu_.rows(); }

private:
    CMat lu_;
    std::vector<int> piv_;
    bool singular_ = false;
};

/// Dense real LU, same contract as ComplexLU.
class RealLU {
public:
    RealLU() = default;
    explicit RealLU(const Mat& a) { factor(a); }
    void factor(const Mat& a);
    Vec solve(const Vec& b) const;
    Mat solve(const Mat& b) const;
    bool singular() const { return singular_; }

private:
    Mat lu_;
    std::vector<int> piv_;
    bool singular_ = false;
};

struct SingularPair {
    double sigma = 0.0;
    CVec right;
};

/// Smallest singular value and right vector by full SVD (gesdd).
SingularPair smallest_singular_svd(const CMat& a);

/// Smallest singular value by inverse iteration on A^H A using one LU.
SingularPair smallest_singular_inverse(const CMat& a, int iters = 12);

/// Eigen-decomposition of a real symmetric matrix, eigenvalues descending.
void symmetric_eigen(const Mat& a, Vec& values, Mat& vectors);

/// Eigenvalues and right eigenvectors of a general real matrix (geev).
void general_eigen(const Mat& a, CVec& values, CMat& vectors);

}  // namespace reso
