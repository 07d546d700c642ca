#pragma once

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "reso/qfunction.hpp"

namespace reso {

struct SearchWindow {
    double re_min = 0.0, re_max = 1.0;
    double im_min = -1.0, im_max = 0.0;
    int n_re = 16, n_im = 16;

    /// Throws ConfigError unless the window is nonempty with at least an 8x8 grid.
    void validate() const;
    bool contains(cd k, double slack = 0.0) const;
};

/// Pencil as a function of kappa together with the weights of its space.
struct Pencil {
    std::function<CMat(cd kappa, bool derivative)> eval;
    Vec weights;
    double eps = 1.0;
    int case_id = 0;  ///< 0: unscaled Full form with the scene's material values
};

/// Unscaled Full pencil of the scene (case_id = 0) or the rescaled pencil of regime case_id at eps.
Pencil make_pencil(const Operators& ops, double eps, int case_id);

struct Resonance {
    cd kappa = 0.0;
    CVec x;  ///< kernel vector, unit weighted norm
    double residual = 0.0;  ///< |Q x| / (|Q| |x|) in weighted norms
    int iters = 0;
    double eps = 1.0;
    int case_id = 0;
};

struct RefineOptions {
    int max_iters = 25;
    double tol_step = 1e-12;      ///< relative kappa step for convergence
    double tol_residual = 1e-8;   ///< certification threshold
};

struct FinderError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// sigma_min of the pencil on the window grid (row-major in Im, then Re).
struct ScanResult {
    std::vector<cd> grid;
    std::vector<double> sigma;
    std::vector<cd> candidates;  ///< strict local minima below median/10, ascending sigma
};
ScanResult scan(const Pencil& pencil, const SearchWindow& window);

/// Augmented Newton iteration on {Q x = 0, c^H x = 1}. Throws FinderError on non-convergence
/// or when the iterate leaves the window (if given).
Resonance refine(const Pencil& pencil, cd seed, const RefineOptions& opt = {}, const SearchWindow* window = nullptr);

struct SweepResult {
    std::vector<Resonance> branch;
    std::vector<cd> predicted;
    double slope = 0.0;  ///< least-squares slope of log|kappa - prediction| against log(param)
};

/// Tracks one branch over a decreasing eps list, seeding each eps with the previous kappa
/// (or with seed_of(eps) when given). param(eps) is the abscissa of the slope fit.
SweepResult sweep(const std::function<Pencil(double)>& pencil_at, const std::vector<double>& eps_list, cd seed,
                  const std::function<cd(double)>& prediction, const std::function<double(double)>& param = {},
                  const std::function<cd(double)>& seed_of = {}, const RefineOptions& opt = {});

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Least-squares polynomial coefficients c_0..c_degree of y ~ sum c_k x^k.
std::vector<double> polyfit(const std::vector<double>& x, const std::vector<double>& y, int degree);

/// CSV rows: case,eps,re_kappa,im_kappa,residual,iters (with header).
void write_resonance_csv(std::ostream& out, const std::vector<Resonance>& rows);

/// 2-norm estimate by power iteration on A^H A.
double norm2_estimate(const CMat& a, int iters = 30);

}  // namespace reso
