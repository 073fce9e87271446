#include "mems/potential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mems {

OperatorCoefficients::OperatorCoefficients(const Deflection& defl, double eps) : eps2_(eps * eps) {
    const auto& u = defl.u();
    const auto& ux = defl.ux();
    const auto& uxx = defl.uxx();
    const std::size_t n = u.size();
    alpha_.resize(n);
    beta_.resize(n);
    gamma_.resize(n);
    kappa_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double h = 1.0 + u[i];
        if (!(h > 0.0)) {
            std::ostringstream os;
            os << "u = " << u[i] << " at node " << i << ": membrane touches the ground plate";
            throw QuenchedStateError(os.str());
        }
        const double a = ux[i] / h;
        alpha_[i] = a;
        beta_[i] = 1.0 / (h * h);
        gamma_[i] = eps2_ * ux[i] * ux[i] / (h * h);
        kappa_[i] = 2.0 * a * a - uxx[i] / h;
    }
}

std::vector<double> apply_operator(const Potential& phi, const Deflection& defl, double eps,
                                   const Grid& grid) {
    if (!phi.matches(grid) || defl.size() != grid.x_nodes()) {
        throw InvalidGridError("apply_operator: field sizes do not match the grid");
    }
    const OperatorCoefficients c(defl, eps);
    const double dx = grid.dx();
    const double de = grid.deta();
    std::vector<double> r(grid.x_nodes() * grid.eta_nodes(), 0.0);
    for (int i = 1; i < grid.nx(); ++i) {
        for (int j = 1; j < grid.neta(); ++j) {
            const double eta = grid.eta(j);
            const double pxx = (phi(i + 1, j) - 2.0 * phi(i, j) + phi(i - 1, j)) / (dx * dx);
            const double pee = (phi(i, j + 1) - 2.0 * phi(i, j) + phi(i, j - 1)) / (de * de);
            const double pe = (phi(i, j + 1) - phi(i, j - 1)) / (2.0 * de);
            const double pxe = (phi(i + 1, j + 1) - phi(i + 1, j - 1) - phi(i - 1, j + 1) +
                                phi(i - 1, j - 1)) /
                               (4.0 * dx * de);
            r[grid.index(i, j)] = c.a_xx() * pxx + c.a_xeta(i, eta) * pxe +
                                  c.a_etaeta(i, eta) * pee + c.a_eta(i, eta) * pe;
        }
    }
    return r;
}

namespace detail {

void ColumnOperator::factor(const OperatorCoefficients& c, const Grid& grid, int stride) {
    nx_ = grid.nx();
    neta_ = grid.neta();
    m_ = static_cast<std::size_t>(neta_) - 1;
    const std::size_t cols = static_cast<std::size_t>(nx_) - 1;
    const std::size_t n = m_ * cols;
    lo_.resize(n);
    diag_.resize(n);
    up_.resize(n);
    cprime_.resize(n);
    invden_.resize(n);
    mixed_.resize(n);
    rhs_.resize(m_);
    const double dx = grid.dx();
    const double de = grid.deta();
    const double cx = c.eps2() / (dx * dx);
    xcoupling_ = cx;
    for (std::size_t col = 0; col < cols; ++col) {
        const int i = (static_cast<int>(col) + 1) * stride;
        const std::size_t base = col * m_;
        for (std::size_t k = 0; k < m_; ++k) {
            const double eta = grid.eta(static_cast<int>(k) + 1);
            const double aee = c.a_etaeta(i, eta) / (de * de);
            const double ae = c.a_eta(i, eta) / (2.0 * de);
            lo_[base + k] = aee - ae;
            up_[base + k] = aee + ae;
            diag_[base + k] = -2.0 * aee - 2.0 * cx;
            mixed_[base + k] = c.a_xeta(i, eta) / (4.0 * dx * de);
        }
        // Thomas factorisation.
        double cp = 0.0;
        for (std::size_t k = 0; k < m_; ++k) {
            const double den = diag_[base + k] - (k > 0 ? lo_[base + k] * cp : 0.0);
            invden_[base + k] = 1.0 / den;
            cp = up_[base + k] / den;
            cprime_[base + k] = cp;
        }
    }
}

double ColumnOperator::sweep(const std::vector<double>& cur, std::vector<double>& next, const double* f,
                             double omega) {
    const std::size_t stride = m_ + 2;
    const std::size_t cols = static_cast<std::size_t>(nx_) - 1;
    double worst = 0.0;
    for (std::size_t col = 0; col < cols; ++col) {
        const std::size_t base = col * m_;
        const double* left = cur.data() + col * stride;
        const double* mid = left + stride;
        const double* right = mid + stride;
        const double* fc = f ? f + (col + 1) * stride : nullptr;
        double* out = next.data() + (col + 1) * stride;
        for (std::size_t k = 0; k < m_; ++k) {
            const std::size_t j = k + 1;
            const double mix = right[j + 1] - right[j - 1] - left[j + 1] + left[j - 1];
            double rhs = -xcoupling_ * (right[j] + left[j]) - mixed_[base + k] * mix;
            if (fc) rhs += fc[j];
            const double res = lo_[base + k] * mid[j - 1] + diag_[base + k] * mid[j] +
                               up_[base + k] * mid[j + 1] - rhs;
            worst = std::max(worst, std::abs(res / diag_[base + k]));
            rhs_[k] = rhs;
        }
        rhs_[0] -= lo_[base] * mid[0];
        rhs_[m_ - 1] -= up_[base + m_ - 1] * mid[m_ + 1];
        // Forward elimination then back substitution.
        double dp = 0.0;
        for (std::size_t k = 0; k < m_; ++k) {
            dp = (rhs_[k] - (k > 0 ? lo_[base + k] * dp : 0.0)) * invden_[base + k];
            rhs_[k] = dp;
        }
        double xv = rhs_[m_ - 1];
        if (omega == 1.0) {
            out[m_] = xv;
            for (std::size_t k = m_ - 1; k-- > 0;) {
                xv = rhs_[k] - cprime_[base + k] * xv;
                out[k + 1] = xv;
            }
        } else {
            out[m_] = mid[m_] + omega * (xv - mid[m_]);
            for (std::size_t k = m_ - 1; k-- > 0;) {
                xv = rhs_[k] - cprime_[base + k] * xv;
                out[k + 1] = mid[k + 1] + omega * (xv - mid[k + 1]);
            }
        }
    }
    return worst;
}

double ColumnOperator::residual(const std::vector<double>& cur, const double* f, std::vector<double>& r) const {
    const std::size_t stride = m_ + 2;
    const std::size_t cols = static_cast<std::size_t>(nx_) - 1;
    double worst = 0.0;
    for (std::size_t col = 0; col < cols; ++col) {
        const std::size_t base = col * m_;
        const double* left = cur.data() + col * stride;
        const double* mid = left + stride;
        const double* right = mid + stride;
        const double* fc = f ? f + (col + 1) * stride : nullptr;
        double* out = r.data() + (col + 1) * stride;
        for (std::size_t k = 0; k < m_; ++k) {
            const std::size_t j = k + 1;
            const double mix = right[j + 1] - right[j - 1] - left[j + 1] + left[j - 1];
            const double a = lo_[base + k] * mid[j - 1] + diag_[base + k] * mid[j] + up_[base + k] * mid[j + 1] +
                             xcoupling_ * (right[j] + left[j]) + mixed_[base + k] * mix;
            const double res = (fc ? fc[j] : 0.0) - a;
            out[j] = res;
            worst = std::max(worst, std::abs(res / diag_[base + k]));
        }
    }
    return worst;
}

int column_jacobi(ColumnOperator& op, std::vector<double>& phi, double target, int max_iter, double& residual) {
    std::vector<double> next = phi;
    int sweeps = 0;
    for (;;) {
        residual = op.sweep(phi, next, nullptr, 1.0);
        if (residual <= target) return sweeps;
        if (!std::isfinite(residual) || sweeps >= max_iter) {
            std::ostringstream os;
            os << "Jacobi iteration did not reach jacobi_tol = " << target << " in " << sweeps
               << " sweeps (residual " << residual << ")";
            throw NoConvergenceError(os.str(), residual);
        }
        phi.swap(next);
        ++sweeps;
    }
}

namespace {

constexpr double kSmoothingWeight = 2.0 / 3.0;
constexpr int kPreSweeps = 2;
constexpr int kPostSweeps = 2;
constexpr int kCoarsestSweeps = 2000;
constexpr double kCoarsestReduction = 1e-3;

} // namespace

void SemiCoarsening::setup(const OperatorCoefficients& c, const Grid& grid) {
    std::size_t count = 1;
    for (int n = grid.nx(); n % 2 == 0 && n / 2 >= 8; n /= 2) ++count;
    if (levels_.size() != count) levels_.resize(count);
    int stride = 1;
    for (std::size_t l = 0; l < count; ++l) {
        const Grid g(grid.nx() / stride, grid.neta(), 0.0);
        auto& lev = levels_[l];
        lev.op.factor(c, g, stride);
        const std::size_t n = lev.op.size();
        if (lev.r.size() != n) {
            lev.r.assign(n, 0.0);
            if (l > 0) {
                lev.x.assign(n, 0.0);
                lev.tmp.assign(n, 0.0);
                lev.f.assign(n, 0.0);
            }
        }
        stride *= 2;
    }
}

void SemiCoarsening::cycle(std::size_t l) {
    auto& lev = levels_[l];
    const double* f = l == 0 ? nullptr : lev.f.data();
    if (l + 1 == levels_.size()) {
        double first = 0.0;
        for (int k = 0; k < kCoarsestSweeps; ++k) {
            const double res = lev.op.sweep(lev.x, lev.tmp, f, 1.0);
            lev.x.swap(lev.tmp);
            if (k == 0) first = res;
            if (res <= kCoarsestReduction * first) break;
        }
        return;
    }
    for (int k = 0; k < kPreSweeps; ++k) {
        lev.op.sweep(lev.x, lev.tmp, f, kSmoothingWeight);
        lev.x.swap(lev.tmp);
    }
    if (l == 0) fine_sweeps_ += kPreSweeps + kPostSweeps;
    lev.op.residual(lev.x, f, lev.r);

    auto& next = levels_[l + 1];
    const std::size_t h = static_cast<std::size_t>(lev.op.neta()) + 1;
    std::fill(next.x.begin(), next.x.end(), 0.0);
    for (int ic = 1; ic < next.op.nx(); ++ic) {
        const std::size_t i = 2 * static_cast<std::size_t>(ic);
        const double* rl = lev.r.data() + (i - 1) * h;
        const double* rm = rl + h;
        const double* rr = rm + h;
        double* fc = next.f.data() + static_cast<std::size_t>(ic) * h;
        for (std::size_t j = 1; j + 1 < h; ++j) fc[j] = 0.25 * (rl[j] + 2.0 * rm[j] + rr[j]);
    }
    cycle(l + 1);

    for (int i = 1; i < lev.op.nx(); ++i) {
        const std::size_t ic = static_cast<std::size_t>(i) / 2;
        double* xf = lev.x.data() + static_cast<std::size_t>(i) * h;
        const double* e0 = next.x.data() + ic * h;
        if (i % 2 == 0) {
            for (std::size_t j = 1; j + 1 < h; ++j) xf[j] += e0[j];
        } else {
            const double* e1 = e0 + h;
            for (std::size_t j = 1; j + 1 < h; ++j) xf[j] += 0.5 * (e0[j] + e1[j]);
        }
    }
    for (int k = 0; k < kPostSweeps; ++k) {
        lev.op.sweep(lev.x, lev.tmp, f, kSmoothingWeight);
        lev.x.swap(lev.tmp);
    }
}

int SemiCoarsening::solve(std::vector<double>& phi, double target, int max_cycles, double& residual) {
    auto& top = levels_.front();
    top.x.swap(phi);
    top.tmp = top.x;
    fine_sweeps_ = 0;
    int cycles = 0;
    for (;;) {
        residual = top.op.residual(top.x, nullptr, top.r);
        if (residual <= target) break;
        if (!std::isfinite(residual) || cycles >= max_cycles) {
            top.x.swap(phi);
            std::ostringstream os;
            os << "potential solve did not reach jacobi_tol = " << target << " in " << cycles
               << " cycles (residual " << residual << ")";
            throw NoConvergenceError(os.str(), residual);
        }
        cycle(0);
        ++cycles;
    }
    top.x.swap(phi);
    return fine_sweeps_;
}

} // namespace detail

namespace {

void reset_boundary(std::vector<double>& phi, const Grid& grid) {
    for (int i = 0; i <= grid.nx(); ++i) {
        phi[grid.index(i, 0)] = 0.0;
        phi[grid.index(i, grid.neta())] = 1.0;
    }
    for (int j = 0; j <= grid.neta(); ++j) {
        phi[grid.index(0, j)] = grid.eta(j);
        phi[grid.index(grid.nx(), j)] = grid.eta(j);
    }
}

} // namespace

PotentialSolve solve_potential(const Deflection& defl, double eps, const Grid& grid,
                               const Tolerances& tol, const std::optional<Potential>& init) {
    if (defl.size() != grid.x_nodes()) throw InvalidGridError("solve_potential: deflection size does not match the grid");
    const OperatorCoefficients coeff(defl, eps);

    std::vector<double> cur;
    if (init) {
        if (!init->matches(grid)) throw InvalidGridError("solve_potential: initial potential does not match the grid");
        cur = init->values();
    } else {
        cur = Potential::linear(grid).values();
    }
    reset_boundary(cur, grid);

    detail::SemiCoarsening solver;
    solver.setup(coeff, grid);
    double residual = 0.0;
    const int sweeps = solver.solve(cur, tol.jacobi_tol, tol.jacobi_max_iter, residual);
    return {Potential(grid, std::move(cur)), sweeps, residual};
}

std::vector<double> boundary_flux(const Potential& phi, const Grid& grid) {
    if (grid.neta() < 2) throw InvalidGridError("boundary_flux needs neta >= 2");
    if (!phi.matches(grid)) throw InvalidGridError("boundary_flux: potential does not match the grid");
    const int top = grid.neta();
    const double inv = 1.0 / (2.0 * grid.deta());
    std::vector<double> q(grid.x_nodes());
    for (int i = 0; i <= grid.nx(); ++i) {
        q[static_cast<std::size_t>(i)] = (3.0 * phi(i, top) - 4.0 * phi(i, top - 1) + phi(i, top - 2)) * inv;
    }
    return q;
}

std::vector<PhysicalSample> untransform_potential(const Potential& phi, const Deflection& defl,
                                                  const Grid& grid) {
    if (!phi.matches(grid) || defl.size() != grid.x_nodes()) {
        throw InvalidGridError("untransform_potential: field sizes do not match the grid");
    }
    if (!(defl.min() > -1.0)) throw QuenchedStateError("untransform_potential: membrane touches the ground plate");
    std::vector<PhysicalSample> out;
    out.reserve(grid.x_nodes() * grid.eta_nodes());
    for (int j = 0; j <= grid.neta(); ++j) {
        for (int i = 0; i <= grid.nx(); ++i) {
            const double h = 1.0 + defl.u()[static_cast<std::size_t>(i)];
            out.push_back({grid.x(i), h * grid.eta(j) - 1.0, phi(i, j)});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// WarmPotential

WarmPotential::WarmPotential(const Grid& grid, double eps)
    : grid_(grid), eps_(eps), phi_(Potential::linear(grid)), flux_(grid.x_nodes(), 1.0) {}

void WarmPotential::update(const Deflection& defl, const Tolerances& tol, double t) {
    if (defl.size() != grid_.x_nodes()) throw InvalidGridError("WarmPotential: deflection size does not match the grid");
    OperatorCoefficients coeff(defl, eps_);
    if (at_ && residual_bound(coeff) <= tol.jacobi_tol) {
        ++skips_;
        return;
    }
    auto& cur = phi_.values();
    if (solves_ >= 2 && t_at_ > t_prev_) {
        // Start from the linear extrapolation of the last two verified solves.
        const double r = std::min((t - t_at_) / (t_at_ - t_prev_), kMaxExtrapolation);
        for (std::size_t k = 0; k < cur.size(); ++k) {
            const double step = cur[k] - prev_[k];
            prev_[k] = cur[k];
            cur[k] += r * step;
        }
    } else {
        prev_ = cur;
    }
    solver_.setup(coeff, grid_);
    double residual = 0.0;
    sweeps_ += solver_.solve(cur, kWarmSolveFraction * tol.jacobi_tol, tol.jacobi_max_iter, residual);
    ++solves_;
    t_prev_ = t_at_;
    t_at_ = t;
    flux_ = boundary_flux(phi_, grid_);
    at_.emplace(std::move(coeff));
    refresh_bounds();
}

void WarmPotential::refresh_bounds() {
    const auto& c = *at_;
    const std::size_t n = grid_.x_nodes();
    res_max_.assign(n, 0.0);
    mixed_max_.assign(n, 0.0);
    d2_max_.assign(n, 0.0);
    d2eta_max_.assign(n, 0.0);
    d1_max_.assign(n, 0.0);
    const double dx = grid_.dx();
    const double de = grid_.deta();
    const auto& p = phi_;
    for (int i = 1; i < grid_.nx(); ++i) {
        const auto ii = static_cast<std::size_t>(i);
        for (int j = 1; j < grid_.neta(); ++j) {
            const double eta = grid_.eta(j);
            const double pxx = (p(i + 1, j) - 2.0 * p(i, j) + p(i - 1, j)) / (dx * dx);
            const double pee = (p(i, j + 1) - 2.0 * p(i, j) + p(i, j - 1)) / (de * de);
            const double pe = (p(i, j + 1) - p(i, j - 1)) / (2.0 * de);
            const double pxe =
                (p(i + 1, j + 1) - p(i + 1, j - 1) - p(i - 1, j + 1) + p(i - 1, j - 1)) / (4.0 * dx * de);
            const double r = c.a_xx() * pxx + c.a_xeta(i, eta) * pxe + c.a_etaeta(i, eta) * pee +
                              c.a_eta(i, eta) * pe;
            res_max_[ii] = std::max(res_max_[ii], std::abs(r));
            mixed_max_[ii] = std::max(mixed_max_[ii], eta * std::abs(pxe));
            d2_max_[ii] = std::max(d2_max_[ii], std::abs(pee));
            d2eta_max_[ii] = std::max(d2eta_max_[ii], eta * eta * std::abs(pee));
            d1_max_[ii] = std::max(d1_max_[ii], eta * std::abs(pe));
        }
    }
}

double WarmPotential::residual_bound(const OperatorCoefficients& coeff) const {
    const auto& old = *at_;
    const double eps2 = coeff.eps2();
    const double cx = 2.0 * eps2 / (grid_.dx() * grid_.dx());
    const double ce = 2.0 / (grid_.deta() * grid_.deta());
    double worst = 0.0;
    for (int i = 1; i < grid_.nx(); ++i) {
        const auto ii = static_cast<std::size_t>(i);
        const double delta = res_max_[ii] +
                             2.0 * eps2 * std::abs(coeff.alpha()[ii] - old.alpha()[ii]) * mixed_max_[ii] +
                             std::abs(coeff.beta()[ii] - old.beta()[ii]) * d2_max_[ii] +
                             std::abs(coeff.gamma()[ii] - old.gamma()[ii]) * d2eta_max_[ii] +
                             eps2 * std::abs(coeff.kappa()[ii] - old.kappa()[ii]) * d1_max_[ii];
        // The point diagonal is smallest at eta = 0.
        const double diag_min = cx + ce * coeff.beta()[ii];
        worst = std::max(worst, delta / diag_min);
    }
    // Headroom for round-off in the bound itself.
    return worst * (1.0 + 1e-12) + 1e-300;
}

} // namespace mems
