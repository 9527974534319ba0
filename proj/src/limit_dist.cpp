#include "segbreak/limit_dist.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "segbreak/errors.hpp"

namespace segbreak {

namespace moments {

double pos(double a) {
    const double s = 1.0 - a;
    return 0.5 * s * s;
}

double pos_pos(double a, double b) {
    const double c = std::max(a, b);
    // ∫_c^1 (r-a)(r-b) dr
    return (1.0 - c * c * c) / 3.0 - 0.5 * (a + b) * (1.0 - c * c) + a * b * (1.0 - c);
}

double r_ind(double a) { return 0.5 * (1.0 - a * a); }

double ind_ind(double a, double b) { return 1.0 - std::max(a, b); }

double pos_ind(double a, double b) {
    const double c = std::max(a, b);
    // ∫_c^1 (r-a) dr
    const double s1 = 1.0 - a, s2 = c - a;
    return 0.5 * (s1 * s1 - s2 * s2);
}

double pos_sq(double a) {
    const double s = 1.0 - a;
    return s * s * s / 3.0;
}

}  // namespace moments

namespace {

// <f_i[row], f_j[col]> with f = (1, r, (r-l_1)+, ...)
double ff_entry(int row, int col, const std::vector<double>& li, const std::vector<double>& lj) {
    const bool ri = row >= 2, rj = col >= 2;
    if (!ri && !rj) {
        if (row == 0 && col == 0) return 1.0;
        if (row + col == 1) return 0.5;
        return 1.0 / 3.0;
    }
    if (ri && rj) return moments::pos_pos(li[row - 2], lj[col - 2]);
    if (ri) return col == 0 ? moments::pos(li[row - 2]) : moments::pos_pos(0.0, li[row - 2]);
    return row == 0 ? moments::pos(lj[col - 2]) : moments::pos_pos(0.0, lj[col - 2]);
}

// <f_i[row], g_j[col]> with g = (1(r>l_1), ...)
double fg_entry(int row, int col, const std::vector<double>& li, const std::vector<double>& lj) {
    if (row == 0) return moments::ind_ind(lj[col], lj[col]);  // 1 - lj
    if (row == 1) return moments::r_ind(lj[col]);
    return moments::pos_ind(li[row - 2], lj[col]);
}

void check_fractions(const std::vector<std::vector<double>>& lambda) {
    for (const auto& li : lambda)
        for (double l : li)
            if (!(l > 0.0 && l < 1.0))
                throw std::invalid_argument("limit_dist: break fraction outside (0,1)");
}

Eigen::VectorXd stack_delta(const std::vector<std::vector<double>>& delta) {
    int m = 0;
    for (const auto& d : delta) m += static_cast<int>(d.size());
    Eigen::VectorXd out(m);
    int pos = 0;
    for (const auto& d : delta)
        for (double v : d) out[pos++] = v;
    return out;
}

// Stacks per-equation-pair blocks weighted by the entries of an n x n
// matrix: out block (i,j) = w(i,j) * B[i][j].
Eigen::MatrixXd stack_weighted(const std::vector<std::vector<Eigen::MatrixXd>>& B,
                               const Eigen::MatrixXd& w) {
    const int n = static_cast<int>(B.size());
    std::vector<int> rows(n), cols(n);
    int R = 0, C = 0;
    for (int i = 0; i < n; ++i) {
        rows[i] = static_cast<int>(B[i][0].rows());
        cols[i] = static_cast<int>(B[0][i].cols());
        R += rows[i];
        C += cols[i];
    }
    Eigen::MatrixXd out(R, C);
    int ro = 0;
    for (int i = 0; i < n; ++i) {
        int co = 0;
        for (int j = 0; j < n; ++j) {
            out.block(ro, co, rows[i], cols[j]) = w(i, j) * B[i][j];
            co += cols[j];
        }
        ro += rows[i];
    }
    return out;
}

}  // namespace

MomentBlocks moment_blocks(const std::vector<std::vector<double>>& lambda) {
    check_fractions(lambda);
    const int n = static_cast<int>(lambda.size());
    MomentBlocks blocks;
    blocks.m.resize(n);
    for (int i = 0; i < n; ++i) blocks.m[i] = static_cast<int>(lambda[i].size());
    blocks.FF.assign(n, std::vector<Eigen::MatrixXd>(n));
    blocks.FG.assign(n, std::vector<Eigen::MatrixXd>(n));
    blocks.GF.assign(n, std::vector<Eigen::MatrixXd>(n));
    blocks.GG.assign(n, std::vector<Eigen::MatrixXd>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const auto& li = lambda[i];
            const auto& lj = lambda[j];
            const int pi = 2 + blocks.m[i], pj = 2 + blocks.m[j];
            Eigen::MatrixXd FF(pi, pj), FG(pi, blocks.m[j]), GF(blocks.m[i], pj),
                GG(blocks.m[i], blocks.m[j]);
            for (int a = 0; a < pi; ++a)
                for (int b = 0; b < pj; ++b) FF(a, b) = ff_entry(a, b, li, lj);
            for (int a = 0; a < pi; ++a)
                for (int b = 0; b < blocks.m[j]; ++b) FG(a, b) = fg_entry(a, b, li, lj);
            for (int a = 0; a < blocks.m[i]; ++a)
                for (int b = 0; b < pj; ++b) GF(a, b) = fg_entry(b, a, lj, li);
            for (int a = 0; a < blocks.m[i]; ++a)
                for (int b = 0; b < blocks.m[j]; ++b) GG(a, b) = moments::ind_ind(li[a], lj[b]);
            blocks.FF[i][j] = std::move(FF);
            blocks.FG[i][j] = std::move(FG);
            blocks.GF[i][j] = std::move(GF);
            blocks.GG[i][j] = std::move(GG);
        }
    return blocks;
}

LimitCov assemble_limit_cov(const std::vector<std::vector<double>>& lambda,
                            const std::vector<std::vector<double>>& delta,
                            const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& psi) {
    for (std::size_t i = 0; i < lambda.size(); ++i)
        if (lambda[i].size() != delta[i].size())
            throw std::invalid_argument("assemble_limit_cov: lambda/delta shape mismatch");
    for (const auto& d : delta)
        for (double v : d)
            if (v == 0.0) throw std::invalid_argument("assemble_limit_cov: zero slope change");

    MomentBlocks blocks = moment_blocks(lambda);
    Eigen::MatrixXd s = sigma.inverse();
    Eigen::MatrixXd kappa = s * psi * s;

    Eigen::MatrixXd q_ff = stack_weighted(blocks.FF, s);
    Eigen::MatrixXd q_fg = stack_weighted(blocks.FG, s);
    Eigen::MatrixXd q_gf = stack_weighted(blocks.GF, s);
    Eigen::MatrixXd q_gg = stack_weighted(blocks.GG, s);
    Eigen::MatrixXd g_ff = stack_weighted(blocks.FF, kappa);
    Eigen::MatrixXd g_fg = stack_weighted(blocks.FG, kappa);
    Eigen::MatrixXd g_gf = stack_weighted(blocks.GF, kappa);
    Eigen::MatrixXd g_gg = stack_weighted(blocks.GG, kappa);

    Eigen::LDLT<Eigen::MatrixXd> qff(q_ff);
    if (qff.info() != Eigen::Success)
        throw NumericalError("assemble_limit_cov: Q_FF is singular (degenerate fractions)");
    Eigen::MatrixXd qff_inv_qfg = qff.solve(q_fg);
    Eigen::MatrixXd qff_inv_gfg = qff.solve(g_fg);

    Eigen::VectorXd d = stack_delta(delta);
    Eigen::MatrixXd core0 = g_gg - g_gf * qff_inv_qfg - q_gf * qff_inv_gfg +
                            q_gf * qff.solve(g_ff * qff_inv_qfg);
    Eigen::MatrixXd core1 = q_gg - q_gf * qff_inv_qfg;

    LimitCov cov;
    cov.d_delta = d;
    cov.xi0 = d.asDiagonal() * core0 * d.asDiagonal();
    cov.xi1 = d.asDiagonal() * core1 * d.asDiagonal();
    cov.xi0 = 0.5 * (cov.xi0 + cov.xi0.transpose()).eval();
    Eigen::LDLT<Eigen::MatrixXd> xi1(cov.xi1);
    cov.xi = xi1.solve(xi1.solve(cov.xi0).transpose()).transpose();
    cov.xi = 0.5 * (cov.xi + cov.xi.transpose()).eval();
    if (!cov.xi.allFinite())
        throw NumericalError("assemble_limit_cov: xi1 is singular (degenerate fractions)");
    return cov;
}

EquationLimitCov assemble_eq_limit_cov(const std::vector<std::vector<double>>& lambda,
                                       const std::vector<std::vector<double>>& delta,
                                       const Eigen::MatrixXd& psi) {
    for (std::size_t i = 0; i < lambda.size(); ++i)
        if (lambda[i].size() != delta[i].size())
            throw std::invalid_argument("assemble_eq_limit_cov: lambda/delta shape mismatch");
    for (const auto& d : delta)
        for (double v : d)
            if (v == 0.0) throw std::invalid_argument("assemble_eq_limit_cov: zero slope change");

    MomentBlocks blocks = moment_blocks(lambda);
    const int n = static_cast<int>(lambda.size());
    int m = 0;
    std::vector<int> offs(n);
    for (int i = 0; i < n; ++i) {
        offs[i] = m;
        m += blocks.m[i];
    }

    // projection coefficients A_i = GF_ii FF_ii^-1 so that p_i = g_i - A_i f_i
    std::vector<Eigen::MatrixXd> proj(n), inner_inv(n);
    for (int i = 0; i < n; ++i) {
        if (blocks.m[i] == 0) {
            proj[i].resize(0, 2);
            inner_inv[i].resize(0, 0);
            continue;
        }
        proj[i] = blocks.FF[i][i].ldlt().solve(blocks.GF[i][i].transpose()).transpose();
        Eigen::MatrixXd inner = blocks.GG[i][i] - proj[i] * blocks.FG[i][i];
        inner = 0.5 * (inner + inner.transpose()).eval();
        inner_inv[i] = inner.inverse();
        if (!inner_inv[i].allFinite())
            throw NumericalError("assemble_eq_limit_cov: degenerate projection");
    }

    EquationLimitCov cov;
    cov.P.assign(n, std::vector<Eigen::MatrixXd>(n));
    cov.xi_s.setZero(m, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (blocks.m[i] == 0 || blocks.m[j] == 0) {
                cov.P[i][j].resize(blocks.m[i], blocks.m[j]);
                continue;
            }
            // ∫ p_i p_j' = GG_ij - A_i FG_ij - GF_ij A_j' + A_i FF_ij A_j'
            Eigen::MatrixXd cross = blocks.GG[i][j] - proj[i] * blocks.FG[i][j] -
                                    blocks.GF[i][j] * proj[j].transpose() +
                                    proj[i] * blocks.FF[i][j] * proj[j].transpose();
            cov.P[i][j] = inner_inv[i] * cross * inner_inv[j];
            Eigen::VectorXd di_inv(blocks.m[i]), dj_inv(blocks.m[j]);
            for (int a = 0; a < blocks.m[i]; ++a) di_inv[a] = 1.0 / delta[i][a];
            for (int b = 0; b < blocks.m[j]; ++b) dj_inv[b] = 1.0 / delta[j][b];
            cov.xi_s.block(offs[i], offs[j], blocks.m[i], blocks.m[j]) =
                psi(i, j) * di_inv.asDiagonal() * cov.P[i][j] * dj_inv.asDiagonal();
        }
    return cov;
}

AddBreakKernels::AddBreakKernels(const std::vector<std::vector<double>>& lambda,
                                 const std::vector<std::vector<double>>& delta,
                                 const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& psi, int eq)
    : lambda_(lambda), eq_(eq) {
    const int n = static_cast<int>(lambda.size());
    if (eq < 0 || eq >= n) throw std::invalid_argument("addbreak_kernels: bad equation index");
    MomentBlocks blocks = moment_blocks(lambda);
    s_ = sigma.inverse();
    kappa_ = s_ * psi * s_;

    f_offsets_.resize(n);
    psum_ = 0;
    m_ = 0;
    for (int i = 0; i < n; ++i) {
        f_offsets_[i] = psum_;
        psum_ += 2 + blocks.m[i];
        m_ += blocks.m[i];
    }

    Eigen::MatrixXd q_ff = stack_weighted(blocks.FF, s_);
    gamma_ff_ = stack_weighted(blocks.FF, kappa_);
    q_gf_ = stack_weighted(blocks.GF, s_);
    gamma_gf_ = stack_weighted(blocks.GF, kappa_);
    qff_inv_ = q_ff.inverse();

    d_delta_ = stack_delta(delta);
    LimitCov sys = assemble_limit_cov(lambda, delta, sigma, psi);
    xi0_sys_ = sys.xi0;
    xi1_sys_inv_ = sys.xi1.inverse();
}

Eigen::VectorXd AddBreakKernels::fb(double nu) const {
    Eigen::VectorXd out(psum_);
    const int n = static_cast<int>(lambda_.size());
    for (int i = 0; i < n; ++i) {
        out[f_offsets_[i]] = moments::pos(nu);
        out[f_offsets_[i] + 1] = moments::pos_pos(0.0, nu);
        for (std::size_t a = 0; a < lambda_[i].size(); ++a)
            out[f_offsets_[i] + 2 + static_cast<int>(a)] = moments::pos_pos(lambda_[i][a], nu);
    }
    return out;
}

namespace {
Eigen::VectorXd weight_stack_f(const Eigen::VectorXd& raw, const Eigen::MatrixXd& w, int col,
                               const std::vector<int>& offsets, int n, int total) {
    Eigen::VectorXd out(total);
    for (int j = 0; j < n; ++j) {
        int len = (j + 1 < n ? offsets[j + 1] : total) - offsets[j];
        out.segment(offsets[j], len) = w(j, col) * raw.segment(offsets[j], len);
    }
    return out;
}
}  // namespace

double AddBreakKernels::xi1(double nu) const {
    const int n = static_cast<int>(lambda_.size());
    Eigen::VectorXd raw = fb(nu);
    Eigen::VectorXd q_fb = weight_stack_f(raw, s_, eq_, f_offsets_, n, psum_);
    return s_(eq_, eq_) * moments::pos_sq(nu) - q_fb.dot(qff_inv_ * q_fb);
}

double AddBreakKernels::xi0(double nu) const {
    const int n = static_cast<int>(lambda_.size());
    Eigen::VectorXd raw = fb(nu);
    Eigen::VectorXd q_fb = weight_stack_f(raw, s_, eq_, f_offsets_, n, psum_);
    Eigen::VectorXd g_fb = weight_stack_f(raw, kappa_, eq_, f_offsets_, n, psum_);
    Eigen::VectorXd qinv_qfb = qff_inv_ * q_fb;
    return kappa_(eq_, eq_) * moments::pos_sq(nu) - qinv_qfb.dot(g_fb) -
           g_fb.dot(qff_inv_ * q_fb) + qinv_qfb.dot(gamma_ff_ * qinv_qfb);
}

Eigen::VectorXd AddBreakKernels::varsigma1(double nu) const {
    const int n = static_cast<int>(lambda_.size());
    Eigen::VectorXd raw = fb(nu);
    Eigen::VectorXd q_fb = weight_stack_f(raw, s_, eq_, f_offsets_, n, psum_);
    // GB stacked: block j = s_{j,eq} ∫ g_j b dr
    Eigen::VectorXd q_gb(m_);
    int pos = 0;
    for (int j = 0; j < n; ++j)
        for (double l : lambda_[j]) q_gb[pos++] = s_(j, eq_) * moments::pos_ind(nu, l);
    return d_delta_.asDiagonal() * (q_gb - q_gf_ * (qff_inv_ * q_fb));
}

Eigen::VectorXd AddBreakKernels::varsigma0(double nu) const {
    const int n = static_cast<int>(lambda_.size());
    Eigen::VectorXd raw = fb(nu);
    Eigen::VectorXd q_fb = weight_stack_f(raw, s_, eq_, f_offsets_, n, psum_);
    Eigen::VectorXd g_fb = weight_stack_f(raw, kappa_, eq_, f_offsets_, n, psum_);
    Eigen::VectorXd g_gb(m_);
    int pos = 0;
    for (int j = 0; j < n; ++j)
        for (double l : lambda_[j]) g_gb[pos++] = kappa_(j, eq_) * moments::pos_ind(nu, l);
    Eigen::VectorXd qinv_qfb = qff_inv_ * q_fb;
    return d_delta_.asDiagonal() *
           (g_gb - q_gf_ * (qff_inv_ * g_fb) - gamma_gf_ * qinv_qfb +
            q_gf_ * (qff_inv_ * (gamma_ff_ * qinv_qfb)));
}

double AddBreakKernels::var_eta(double nu, bool fractions_known) const {
    if (fractions_known) return xi0(nu);
    Eigen::VectorXd s1 = varsigma1(nu);
    Eigen::VectorXd s0 = varsigma0(nu);
    return xi0(nu) - s1.dot(xi1_sys_inv_ * s0) - s0.dot(xi1_sys_inv_ * s1) +
           s1.dot(xi1_sys_inv_ * xi0_sys_ * xi1_sys_inv_ * s1);
}

AddBreakKernels addbreak_kernels(const std::vector<std::vector<double>>& lambda,
                                 const std::vector<std::vector<double>>& delta,
                                 const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& psi, int eq) {
    return AddBreakKernels(lambda, delta, sigma, psi, eq);
}

}  // namespace segbreak
