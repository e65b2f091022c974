#include "dfc/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <stdexcept>

#include "dfc/csv.hpp"

namespace dfc {

namespace {

constexpr double kImagSnapTol = 1e-9;  // |Im| below this counts as a real root

struct DelayTerm {
    double tau;
    Matrix coeff;  // matrix multiplying G(t - tau), weight folded in
};

std::vector<DelayTerm> delay_terms(const ClosedLoopDDE& cl) {
    std::vector<DelayTerm> terms;
    for (int i = 1; i <= cl.p(); ++i)
        terms.push_back({i * cl.tau, static_cast<double>(cl.weights[i]) * cl.A1});
    if (cl.tau_q > 0.0) terms.push_back({cl.tau_q, cl.A2});
    return terms;
}

// Chebyshev-Gauss-Lobatto nodes on [-h, 0] (node 0 at theta = 0) and the
// spectral differentiation matrix on those nodes (Trefethen's formula with
// the negative-sum diagonal).
void cheb_nodes_diff(int N, double h, Vector& theta, Matrix& D) {
    theta.resize(N + 1);
    Vector x(N + 1), c(N + 1);
    for (int j = 0; j <= N; ++j) {
        x[j] = std::cos(j * std::numbers::pi / N);
        c[j] = (j == 0 || j == N) ? 2.0 : 1.0;
        if (j % 2 == 1) c[j] = -c[j];
        theta[j] = h * (x[j] - 1.0) / 2.0;
    }
    D.setZero(N + 1, N + 1);
    for (int i = 0; i <= N; ++i)
        for (int j = 0; j <= N; ++j)
            if (i != j) D(i, j) = (c[i] / c[j]) / (x[i] - x[j]);
    for (int i = 0; i <= N; ++i) D(i, i) = -D.row(i).sum();
    D *= 2.0 / h;
}

// Barycentric interpolation coefficients l_j(t) over CGL nodes.
Vector bary_row(const Vector& theta, double t) {
    const int N = static_cast<int>(theta.size()) - 1;
    Vector row = Vector::Zero(N + 1);
    for (int j = 0; j <= N; ++j) {
        if (std::abs(t - theta[j]) < 1e-14) {
            row[j] = 1.0;
            return row;
        }
    }
    double denom = 0.0;
    for (int j = 0; j <= N; ++j) {
        double w = (j % 2 == 0) ? 1.0 : -1.0;
        if (j == 0 || j == N) w *= 0.5;
        row[j] = w / (t - theta[j]);
        denom += row[j];
    }
    row /= denom;
    return row;
}

bool is_conjugate_pair(Complex a, Complex b, double tol) {
    return std::abs(a - std::conj(b)) < tol;
}

void sort_descending(std::vector<Root>& roots) {
    std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) {
        if (a.value.real() != b.value.real()) return a.value.real() > b.value.real();
        double ia = std::abs(a.value.imag()), ib = std::abs(b.value.imag());
        if (ia != ib) return ia < ib;
        return a.value.imag() > b.value.imag();
    });
}

std::vector<Complex> sorted_eigenvalues(const Matrix& M) {
    Eigen::EigenSolver<Matrix> es(M, /*computeEigenvectors=*/false);
    std::vector<Complex> ev(es.eigenvalues().data(),
                            es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(ev.begin(), ev.end(), [](Complex a, Complex b) { return a.real() > b.real(); });
    return ev;
}

}  // namespace

double char_residual(const ClosedLoopDDE& cl, Complex s) {
    const CMatrix D = char_matrix(cl, s);
    Eigen::JacobiSVD<CMatrix> svd(D);
    const auto& sv = svd.singularValues();
    // sigma_max itself vanishes at roots of 1x1 systems; floor by |s|.
    const double denom = std::max(sv(0), std::abs(s));
    if (denom == 0.0) return 0.0;
    return sv(sv.size() - 1) / denom;
}

Matrix discretize(const ClosedLoopDDE& cl, int N) {
    if (N < 4) throw std::invalid_argument("discretize: N must be >= 4");
    const auto terms = delay_terms(cl);
    if (terms.empty())
        throw std::invalid_argument("discretize: system has no positive delay; use the dense path");

    const int d = cl.dim();
    const double h = cl.max_delay();

    Vector theta;
    Matrix D;
    cheb_nodes_diff(N, h, theta, D);

    // minimum node spacing vs delay separation (soft check)
    double min_spacing = h;
    for (int j = 0; j < N; ++j) min_spacing = std::min(min_spacing, theta[j] - theta[j + 1]);
    for (size_t a = 0; a < terms.size(); ++a)
        for (size_t b = a + 1; b < terms.size(); ++b)
            if (std::abs(terms[a].tau - terms[b].tau) < min_spacing)
                std::cerr << "discretize: delays " << terms[a].tau << " and " << terms[b].tau
                          << " closer than node spacing " << min_spacing
                          << " at N=" << N << "; increase N\n";

    Matrix M = Matrix::Zero((N + 1) * d, (N + 1) * d);
    // boundary row at theta = 0: Gdot(0) = A0 G(0) + sum_j coeff_j G(-tau_j)
    M.block(0, 0, d, d) = cl.A0;
    for (const auto& term : terms) {
        const Vector row = bary_row(theta, -term.tau);
        for (int l = 0; l <= N; ++l)
            if (row[l] != 0.0) M.block(0, l * d, d, d) += row[l] * term.coeff;
    }
    // interior rows: spectral differentiation
    for (int k = 1; k <= N; ++k)
        for (int l = 0; l <= N; ++l)
            M.block(k * d, l * d, d, d) = D(k, l) * Matrix::Identity(d, d);
    return M;
}

NewtonResult newton_refine(const ClosedLoopDDE& cl, Complex s0) {
    NewtonResult res;
    res.root = s0;
    if (!std::isfinite(s0.real()) || !std::isfinite(s0.imag())) return res;

    Complex s = s0;
    for (int it = 1; it <= 50; ++it) {
        res.iterations = it;
        const CMatrix Delta = char_matrix(cl, s);
        const CMatrix dDelta = char_matrix_derivative(cl, s);
        // f'(s)/f(s) = tr(Delta^{-1} Delta'); Newton step = -f/f'.
        Eigen::PartialPivLU<CMatrix> lu(Delta);
        const Complex tr = lu.solve(dDelta).trace();
        if (!std::isfinite(tr.real()) || !std::isfinite(tr.imag()) || tr == Complex(0.0, 0.0)) {
            // Delta numerically singular: s is already on a root.
            res.root = s;
            res.residual = char_residual(cl, s);
            res.converged = res.residual < 1e-8;
            return res;
        }
        const Complex step = -1.0 / tr;
        s += step;
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
            res.root = s0;
            res.residual = char_residual(cl, s0);
            return res;
        }
        if (std::abs(step) < 1e-12) {
            res.root = s;
            res.residual = char_residual(cl, s);
            res.converged = true;
            return res;
        }
        const double r = char_residual(cl, s);
        if (r < 1e-13) {
            res.root = s;
            res.residual = r;
            res.converged = true;
            return res;
        }
    }
    res.root = s;
    res.residual = char_residual(cl, s);
    res.converged = false;
    return res;
}

SpectrumResult rightmost_roots(const ClosedLoopDDE& cl, int count, const SpectrumOptions& opt) {
    if (count < 1) throw std::invalid_argument("rightmost_roots: count must be >= 1");

    SpectrumResult out;
    out.max_delay = cl.max_delay();

    std::vector<Root> validated;
    auto add_validated = [&](Complex s, double residual) {
        if (std::abs(s.imag()) < kImagSnapTol) s = Complex(s.real(), 0.0);
        for (const auto& q : validated)
            if (std::abs(q.value - s) < opt.dedup_tol) return;
        validated.push_back({s, residual});
    };

    bool spectrum_exhausted = false;  // delay-free: the root set is finite and fully returned
    if (cl.delay_free()) {
        // dense eigensolver on A0; every eigenvalue is a root of det(sI - A0)
        spectrum_exhausted = true;
        for (Complex ev : sorted_eigenvalues(cl.A0)) {
            const double r = char_residual(cl, ev);
            if (r <= opt.residual_tol) add_validated(ev, r);
            else spectrum_exhausted = false;
        }
        out.discretization_order = 0;
    } else {
        const int N = opt.discretization_order;
        const auto ev_n = sorted_eigenvalues(discretize(cl, N));
        const auto ev_2n = sorted_eigenvalues(discretize(cl, 2 * N));

        // Compare the rightmost `count` candidates between the two grids.
        bool agree = true;
        const int top = std::min<int>(count, static_cast<int>(ev_2n.size()));
        for (int i = 0; i < top && agree; ++i) {
            double best = std::numeric_limits<double>::max();
            for (const Complex& e : ev_n) best = std::min(best, std::abs(e - ev_2n[i]));
            if (best > opt.agreement_tol) agree = false;
        }
        const auto& pool = agree ? ev_n : ev_2n;
        out.discretization_order = agree ? N : 2 * N;

        const int candidates = std::min<int>(3 * count, static_cast<int>(pool.size()));
        for (int i = 0; i < candidates; ++i) {
            const NewtonResult nr = newton_refine(cl, pool[i]);
            if (nr.converged && nr.residual <= opt.residual_tol) add_validated(nr.root, nr.residual);
        }
    }

    sort_descending(validated);

    // take the rightmost `count`, then close under conjugation
    std::vector<Root> kept(validated.begin(),
                           validated.begin() + std::min<size_t>(count, validated.size()));
    for (size_t i = 0; i < kept.size(); ++i) {
        if (kept[i].value.imag() == 0.0) continue;
        bool has_conj = false;
        for (const auto& q : kept)
            if (is_conjugate_pair(q.value, kept[i].value, opt.dedup_tol)) { has_conj = true; break; }
        if (!has_conj) {
            // Delta(conj s) = conj Delta(s), so the mirror is a root with equal residual.
            kept.push_back({std::conj(kept[i].value), kept[i].residual});
        }
    }
    sort_descending(kept);

    out.roots = std::move(kept);
    out.complete = static_cast<int>(out.roots.size()) >= count || spectrum_exhausted;
    if (!out.roots.empty()) out.abscissa = out.roots.front().value.real();
    else out.abscissa = std::numeric_limits<double>::quiet_NaN();
    return out;
}

void write_roots_csv(const std::string& path, const SpectrumResult& result) {
    CsvWriter csv(path);
    csv.header({"re", "im", "residual"});
    for (const auto& root : result.roots) {
        csv.value(root.value.real());
        csv.value(root.value.imag());
        csv.value(root.residual);
        csv.end_row();
    }
}

}  // namespace dfc
