#include <random>

#include <gtest/gtest.h>

#include "pwdens/harness.hpp"
#include "pwdens/pointset.hpp"
#include "pwdens/pwkernel.hpp"

using namespace pwdens;

namespace {

// (1/2pi) int_S e^{itu} dt by composite Simpson on each interval.
cplx simpson_kernel(const Spectrum& s, double u)
{
    cplx total = 0.0;
    for (const auto& iv : s.intervals()) {
        const int m = 2000;
        const double h = iv.length() / m;
        cplx part = 0.0;
        for (int k = 0; k <= m; ++k) {
            const double w = (k == 0 || k == m) ? 1 : (k % 2 ? 4 : 2);
            part += w * std::polar(1.0, (iv.left + k * h) * u);
        }
        total += part * (h / 3.0);
    }
    return total / (2 * pi);
}

std::vector<double> integers(int lo, int hi)
{
    std::vector<double> v;
    for (int k = lo; k <= hi; ++k)
        v.push_back(k);
    return v;
}

} // namespace

TEST(Kernel, MatchesQuadratureOracle)
{
    for (const Spectrum& s : {Spectrum{{-1.3, 1.3}}, Spectrum{{-2, -1}, {1, 2}}, Spectrum{{0, 2}},
                              Spectrum{{-1, 0.5}, {1.5, 3}}}) {
        for (double u : {0.0, 0.3, -1.7, 5.0, 23.5}) {
            const cplx k = kernel(s, u, 0.0);
            const cplx q = simpson_kernel(s, u);
            EXPECT_NEAR(k.real(), q.real(), 1e-10) << "u = " << u;
            EXPECT_NEAR(k.imag(), q.imag(), 1e-10) << "u = " << u;
        }
    }
}

TEST(Kernel, ClosedFormsAndSymmetries)
{
    const double a = 1.1;
    const Spectrum band{{-a, a}};
    EXPECT_NEAR(kernel(band, 2.5, 0.5).real(), std::sin(2 * a) / (2 * pi), 1e-15);
    EXPECT_DOUBLE_EQ(kernel(band, 3.0, 3.0).real(), 2 * a / (2 * pi));

    const Spectrum two{{-2, -1}, {1, 2}};
    const double u = 0.7;
    EXPECT_NEAR(kernel(two, u, 0.0).real(), (std::sin(2 * u) - std::sin(u)) / (pi * u), 1e-15);
    EXPECT_NEAR(kernel(two, u, 0.0).imag(), 0.0, 1e-15);

    const Spectrum skew{{0, 2}};
    const cplx kxy = kernel(skew, 1.3, -0.4);
    const cplx kyx = kernel(skew, -0.4, 1.3);
    EXPECT_NEAR(std::abs(kxy - std::conj(kyx)), 0.0, 1e-15);
    EXPECT_GT(std::abs(kxy.imag()), 1e-3);
}

TEST(Gram, IdentityAtCriticalSampling)
{
    const auto g = gram(Spectrum{{-pi, pi}}, integers(-10, 10));
    EXPECT_NEAR((g - CMatrix::Identity(21, 21)).norm(), 0.0, 1e-14);
    const auto single = gram(Spectrum{{-1, 2}}, std::vector<double>{4.2});
    EXPECT_DOUBLE_EQ(single(0, 0).real(), 3.0 / (2 * pi));
}

TEST(Gram, PositiveSemidefiniteOnRandomNodes)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-20, 20);
    std::vector<double> nodes(80);
    for (auto& x : nodes)
        x = u(rng);
    const auto g = gram(Spectrum{{-2, -0.5}, {1, 3}}, nodes);
    EXPECT_NEAR((g - g.adjoint()).norm(), 0.0, 1e-14);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(g, Eigen::EigenvaluesOnly);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
    EXPECT_THROW(gram(Spectrum{{-1, 1}}, std::vector<double>{0, 1, 0}), Error);
}

TEST(Ridge, ExactAtCriticalSampling)
{
    const auto [f, rep] = ridge_interpolant(Spectrum{{-pi, pi}}, integers(-5, 5), 5, 0.0);
    EXPECT_NEAR(rep.residual_l2, 0.0, 1e-14);
    EXPECT_NEAR(rep.norm_l2, 1.0, 1e-14);
    EXPECT_NEAR(std::abs(f(0.0) - 1.0), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(f(0.5)), 2 / pi, 1e-14); // sinc shifted to 0
}

TEST(Ridge, ScalarAlgebraWhenGramIsIdentity)
{
    const RidgeSolver solver(Spectrum{{-pi, pi}}, integers(0, 9));
    for (double mu : {1e-3, 0.1, 1.0, 7.0}) {
        const auto rep = solver.solve(3, mu).second;
        EXPECT_NEAR(rep.residual_l2, mu / (1 + mu), 1e-13);
        EXPECT_NEAR(rep.norm_l2, 1 / (1 + mu), 1e-13);
    }
}

TEST(Ridge, MonotoneInRegularization)
{
    const RidgeSolver solver(Spectrum{{-1.2, 1.2}}, integers(-30, 30));
    double last_res = -1, last_norm = std::numeric_limits<double>::infinity();
    for (double mu : {1e-8, 1e-6, 1e-4, 1e-2, 1.0, 10.0}) {
        const auto rep = solver.solve(30, mu).second;
        EXPECT_GE(rep.residual_l2, last_res - 1e-12);
        EXPECT_LE(rep.norm_l2, last_norm + 1e-12);
        last_res = rep.residual_l2;
        last_norm = rep.norm_l2;
    }
}

TEST(Ridge, IllConditionedWithoutRegularization)
{
    const RidgeSolver solver(Spectrum{{-0.5, 0.5}}, integers(-40, 40));
    EXPECT_GT(solver.condition(), ill_conditioning_threshold);
    try {
        solver.solve(40, 0.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ill_conditioned);
    }
    EXPECT_NO_THROW(solver.solve(40, 1e-6));
}

TEST(Ridge, RestrictionConsistencyAndPointwiseBound)
{
    const Spectrum s{{-2, -0.5}, {0.7, 1.9}};
    const auto nodes = integers(-15, 15);
    const RidgeSolver solver(s, nodes);
    const auto [f, rep] = solver.solve(15, 1e-4);
    const CVector at_nodes = f.eval(nodes);
    const CVector gc = solver.gram_matrix() * f.coeffs;
    EXPECT_LE((at_nodes - gc).norm(), 1e-9 * gc.norm());

    const double cap = s.measure() / (2 * pi) * rep.norm_l2 * rep.norm_l2;
    for (double x = -60; x <= 60; x += 0.37)
        EXPECT_LE(std::norm(f(x)), cap * (1 + 1e-12));
}

TEST(Ridge, CoefficientNormMatchesQuadrature)
{
    const Spectrum s{{-1.5, 1.5}};
    const RidgeSolver solver(s, integers(-10, 10));
    const auto [f, rep] = solver.solve(10, 1e-3);
    // |f|^2 decays like 1/x^2; trapezoid on [-4000, 4000] misses < 1e-3 relative.
    double sum = 0;
    const double h = 0.25;
    for (double x = -4000; x <= 4000; x += h)
        sum += std::norm(f(x)) * h;
    EXPECT_NEAR(std::sqrt(sum), rep.norm_l2, 0.01 * rep.norm_l2);
}

TEST(Ridge, CentralResidualApproachesSharpValue)
{
    const double a = pi / 2;
    const RidgeSolver solver(Spectrum{{-a, a}}, integers(-60, 60));
    const auto rep = solver.solve(60, 1e-8).second;
    // Window-restricted residual sits slightly below 1 - a/pi (edge leakage is not charged).
    const double r2 = rep.residual_l2 * rep.residual_l2;
    EXPECT_GT(r2, 1 - a / pi - 0.06);
    EXPECT_LE(r2, 1 - a / pi + 1e-9);
}

TEST(Ridge, SymmetricSpectrumGivesRealCoefficients)
{
    const RidgeSolver solver(Spectrum{{-2, -1}, {1, 2}}, integers(-12, 12));
    const auto [f, rep] = solver.solve(12, 1e-3);
    EXPECT_LE(f.coeffs.imag().cwiseAbs().maxCoeff(), 1e-10);
}

TEST(FrameBound, KnownCases)
{
    EXPECT_NEAR(empirical_frame_bound(Spectrum{{-pi, pi}}, integers(-20, 20)).constant, 1.0, 1e-12);
    const Spectrum s{{-1, 2}};
    EXPECT_NEAR(empirical_frame_bound(s, std::vector<double>{0.3}).constant, std::sqrt(2 * pi / 3.0), 1e-14);

    auto nodes = integers(-10, 10);
    const double spread = empirical_frame_bound(Spectrum{{-pi, pi}}, nodes).constant;
    nodes.push_back(0.01);
    const auto close = empirical_frame_bound(Spectrum{{-pi, pi}}, nodes);
    EXPECT_LT(close.constant, spread);
    EXPECT_GT(close.lambda_max, 1.9);
}

TEST(ExtendedRidge, ReducesToPlainRidgeOnItsOwnNodes)
{
    const Spectrum s{{-1.3, 1.3}};
    const auto nodes = integers(-20, 20);
    const ExtendedRidge ext(s, nodes, nodes);
    const RidgeSolver plain(s, nodes);
    const std::vector<std::size_t> targets{5, 20, 33};
    for (double mu : {1e-2, 1e-1}) {
        const auto batch = ext.solve(targets, mu);
        for (std::size_t t = 0; t < targets.size(); ++t) {
            const auto rep = plain.solve(targets[t], mu).second;
            EXPECT_NEAR(batch.residual_l2[t], rep.residual_l2, 1e-8);
            EXPECT_NEAR(batch.norm_l2[t], rep.norm_l2, 1e-8);
        }
    }
}

TEST(ExtendedRidge, WideEvaluationChargesLeakage)
{
    const Spectrum s{{-pi / 2, pi / 2}};
    const auto nodes = integers(-30, 30);
    const ExtendedRidge narrow(s, nodes, nodes);
    const ExtendedRidge wide(s, nodes, integers(-600, 600));
    const std::vector<std::size_t> t_narrow{30}, t_wide{600};
    const double r_narrow = narrow.solve(t_narrow, 1e-6).residual_l2[0];
    const double r_wide = wide.solve(t_wide, 1e-6).residual_l2[0];
    EXPECT_GT(r_wide, r_narrow);
    EXPECT_NEAR(r_wide * r_wide, 0.5, 0.01);
}

TEST(Certificate, MatchesExtendedRidgeAtFixedRegularization)
{
    const Spectrum s{{-1.2, 1.2}};
    const auto ps = PointSet::from({ArithmeticSet{1, 0, -400, 400}});
    const std::vector<double> mu{1e-3};
    const auto cert = certify_window(s, ps, 10, 0.0, mu, 3, 20, [](long) { return 1e9; });
    const ExtendedRidge ext(s, ps.window(0, 30).points, ps.window(0, 200).points);
    std::vector<std::size_t> rows;
    for (const auto& e : cert.entries)
        rows.push_back(e.eval_index);
    const auto batch = ext.solve(rows, 1e-3);
    for (std::size_t t = 0; t < rows.size(); ++t) {
        EXPECT_NEAR(cert.entries[t].residual_l2, batch.residual_l2[t], 1e-7);
        EXPECT_NEAR(cert.entries[t].norm_l2, batch.norm_l2[t], 1e-7);
    }
}
