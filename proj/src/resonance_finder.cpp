#include "reso/resonance_finder.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <spdlog/spdlog.h>

namespace reso {

void SearchWindow::validate() const {
    if (!(re_min < re_max) || !(im_min < im_max)) throw ConfigError("search window: empty range");
    if (n_re < 8 || n_im < 8) throw ConfigError("search window: grid must be at least 8x8");
}

bool SearchWindow::contains(cd k, double slack) const {
    const double sr = slack * (re_max - re_min), si = slack * (im_max - im_min);
    return k.real() >= re_min - sr && k.real() <= re_max + sr && k.imag() >= im_min - si && k.imag() <= im_max + si;
}

Pencil make_pencil(const Operators& ops, double eps, int case_id) {
    Pencil p;
    p.eps = eps;
    p.case_id = case_id;
    if (case_id == 0) {
        auto scaled = std::make_shared<Operators>(ops.with_eps(eps));
        p.weights = pencil_weights(*scaled, Form::Full);
        p.eval = [scaled](cd k, bool d) { return assemble_q(*scaled, k, Form::Full, d).m; };
    } else {
        rescaling_exponents(case_id);  // validates the regime
        auto base = std::make_shared<Operators>(ops);
        p.weights = pencil_weights(*base, Form::Rescaled);
        p.eval = [base, eps, case_id](cd k, bool d) { return assemble_rescaled(*base, k, eps, case_id, d).m; };
    }
    return p;
}

double norm2_estimate(const CMat& a, int iters) {
    CVec x = CVec::Ones(a.cols()) / std::sqrt(static_cast<double>(a.cols()));
    double s = 0.0;
    for (int i = 0; i < iters; ++i) {
        CVec y = a.adjoint() * (a * x);
        const double n = y.norm();
        if (n == 0.0) return 0.0;
        s = std::sqrt(n);
        x = y / n;
    }
    return s;
}

ScanResult scan(const Pencil& pencil, const SearchWindow& w) {
    w.validate();
    ScanResult r;
    const int nr = w.n_re, ni = w.n_im;
    for (int j = 0; j < ni; ++j)
        for (int i = 0; i < nr; ++i) {
            const double re = w.re_min + (w.re_max - w.re_min) * i / (nr - 1);
            const double im = w.im_min + (w.im_max - w.im_min) * j / (ni - 1);
            const cd k(re, im);
            r.grid.push_back(k);
            r.sigma.push_back(smallest_singular(pencil.eval(k, false), pencil.weights).sigma);
        }
    std::vector<double> sorted = r.sigma;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double threshold = sorted[sorted.size() / 2] / 10.0;
    std::vector<std::pair<double, cd>> found;
    for (int j = 0; j < ni; ++j)
        for (int i = 0; i < nr; ++i) {
            const double s = r.sigma[j * nr + i];
            if (!(s < threshold)) continue;
            bool strict = true;
            for (int dj = -1; dj <= 1 && strict; ++dj)
                for (int di = -1; di <= 1; ++di) {
                    if (!di && !dj) continue;
                    const int ii = i + di, jj = j + dj;
                    if (ii < 0 || jj < 0 || ii >= nr || jj >= ni) continue;
                    if (r.sigma[jj * nr + ii] <= s) {
                        strict = false;
                        break;
                    }
                }
            if (strict) found.emplace_back(s, r.grid[j * nr + i]);
        }
    std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& f : found) r.candidates.push_back(f.second);
    return r;
}

Resonance refine(const Pencil& pencil, cd seed, const RefineOptions& opt, const SearchWindow* window) {
    const Vec& w = pencil.weights;
    const Vec sq = w.cwiseSqrt();
    auto wnorm = [&](const CVec& v) { return sq.asDiagonal() * v; };
    cd kappa = seed;
    CMat q = pencil.eval(kappa, false);
    CVec x = smallest_singular(q, w).right;
    const CVec c = w.cast<cd>().asDiagonal() * x;  // weighted normalization functional
    x /= c.dot(x);
    double step = 1.0;
    for (int it = 0; it <= opt.max_iters; ++it) {
        if (it > 0) q = pencil.eval(kappa, false);
        const CMat qw = sq.asDiagonal() * q * sq.cwiseInverse().asDiagonal();
        const double res = wnorm(q * x).norm() / (norm2_estimate(qw) * wnorm(x).norm());
        if (step <= opt.tol_step && res <= opt.tol_residual) {
            Resonance r;
            r.kappa = kappa;
            r.x = x / wnorm(x).norm();
            r.residual = res;
            r.iters = it;
            r.eps = pencil.eps;
            r.case_id = pencil.case_id;
            return r;
        }
        if (it == opt.max_iters) break;
        ComplexLU lu(q);
        if (lu.singular()) {
            // exactly singular pencil: x spans the kernel already
            step = 0.0;
            continue;
        }
        const CVec u = lu.solve(CVec(pencil.eval(kappa, true) * x));
        const cd d = c.dot(u);
        if (std::abs(d) == 0.0 || !std::isfinite(std::abs(d))) throw FinderError("refine: breakdown of the Newton update");
        const cd dk = 1.0 / d;
        kappa -= dk;
        x = u / d;
        step = std::abs(dk) / std::max(1.0, std::abs(kappa));
        if (window && !window->contains(kappa, 0.25))
            throw FinderError("refine: iterate left the search window");
        if (!std::isfinite(kappa.real()) || !std::isfinite(kappa.imag())) throw FinderError("refine: divergence");
    }
    throw FinderError("refine: no convergence within " + std::to_string(opt.max_iters) + " iterations");
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need two or more points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> polyfit(const std::vector<double>& x, const std::vector<double>& y, int degree) {
    if (degree < 0 || x.size() != y.size() || x.size() < static_cast<std::size_t>(degree + 1))
        throw std::invalid_argument("polyfit: need at least degree + 1 points");
    Mat a(static_cast<Eigen::Index>(x.size()), degree + 1);
    Vec b(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        double p = 1.0;
        for (int k = 0; k <= degree; ++k, p *= x[i]) a(static_cast<Eigen::Index>(i), k) = p;
        b(static_cast<Eigen::Index>(i)) = y[i];
    }
    const Vec c = a.colPivHouseholderQr().solve(b);
    return {c.data(), c.data() + c.size()};
}

SweepResult sweep(const std::function<Pencil(double)>& pencil_at, const std::vector<double>& eps_list, cd seed,
                  const std::function<cd(double)>& prediction, const std::function<double(double)>& param,
                  const std::function<cd(double)>& seed_of, const RefineOptions& opt) {
    for (std::size_t i = 1; i < eps_list.size(); ++i)
        if (!(eps_list[i] < eps_list[i - 1])) throw std::invalid_argument("sweep: eps list must be decreasing");
    SweepResult out;
    cd next = seed;
    std::vector<double> xs, gaps;
    for (double e : eps_list) {
        const cd s = seed_of ? seed_of(e) : next;
        Resonance r = refine(pencil_at(e), s, opt);
        const cd pred = prediction ? prediction(e) : cd(0.0);
        spdlog::debug("sweep eps={} kappa={}{:+}i iters={}", e, r.kappa.real(), r.kappa.imag(), r.iters);
        next = r.kappa;
        out.branch.push_back(r);
        out.predicted.push_back(pred);
        xs.push_back(param ? param(e) : e);
        gaps.push_back(std::abs(r.kappa - pred));
    }
    if (prediction && xs.size() >= 2) out.slope = loglog_slope(xs, gaps);
    return out;
}

void write_resonance_csv(std::ostream& out, const std::vector<Resonance>& rows) {
    out << "case,eps,re_kappa,im_kappa,residual,iters\r\n";
    out.precision(15);
    for (const auto& r : rows)
        out << r.case_id << ',' << r.eps << ',' << r.kappa.real() << ',' << r.kappa.imag() << ',' << r.residual << ','
            << r.iters << "\r\n";
}

}  // namespace reso
