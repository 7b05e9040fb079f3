#include <gtest/gtest.h>

#include "pwdens/concentration.hpp"
#include "pwdens/pwkernel.hpp"

using namespace pwdens;

TEST(Concentration, TraceAndRange)
{
    const auto rep = concentration_operator(Spectrum{{-pi, pi}}, Spectrum{{-5, 5}});
    EXPECT_NEAR(rep.trace_expected, 10.0, 1e-12);
    EXPECT_LT(rep.trace_relative_error(), 1e-10);
    EXPECT_TRUE(rep.eigenvalues_in_unit_range(1e-6));
    EXPECT_TRUE(std::is_sorted(rep.eigenvalues.data(), rep.eigenvalues.data() + rep.eigenvalues.size(),
                               std::greater<>()));
    for (double c = 0.1; c < 0.95; c += 0.1)
        EXPECT_LE(static_cast<double>(rep.count_at_least(c)), rep.landau_bound(c));
}

TEST(Concentration, EigenvaluesStableUnderRefinement)
{
    const Spectrum s{{-2, -1}, {1, 2}};
    const Spectrum q{{-4, -1}, {2, 6}};
    ConcentrationOptions coarse, fine;
    coarse.n_nodes = 64;
    fine.n_nodes = 256;
    const auto a = concentration_operator(s, q, coarse);
    const auto b = concentration_operator(s, q, fine);
    for (Eigen::Index k = 0; k < 8; ++k)
        EXPECT_NEAR(a.eigenvalues[k], b.eigenvalues[k], 1e-10);
}

TEST(Concentration, RejectsCoarseQuadrature)
{
    ConcentrationOptions opts;
    opts.n_nodes = 32;
    try {
        concentration_operator(Spectrum{{-pi, pi}}, Spectrum{{-100, 100}}, opts);
        FAIL();
    } catch (const ResolutionError& e) {
        EXPECT_GE(e.suggested_nodes(), 330u);
    }
    opts.n_nodes = 8;
    EXPECT_THROW(concentration_operator(Spectrum{{-pi, pi}}, Spectrum{{-1, 1}}, opts), Error);
}

TEST(Concentration, SubspaceOfOneSincMatchesDirectIntegral)
{
    // f = K(., 0) for S = [-pi, pi], i.e. sinc(pi x), with ||f|| = 1.
    const Spectrum s{{-pi, pi}};
    MassQuadrature mq;
    mq.region = Spectrum{{-3, 3}};
    mq.domain_lo = -4000;
    mq.domain_hi = 4000;
    mq.bandwidth = pi;
    const std::vector<double> node{0.0};
    const auto res = concentration_of_subspace(
        [&](std::span<const double> xs) { return cross_kernel(s, xs, node); }, mq);
    // int_{-3}^{3} sinc^2 by fine Simpson.
    double sum = 0;
    const int m = 20000;
    const double h = 6.0 / m;
    for (int k = 0; k <= m; ++k) {
        const double x = -3 + k * h;
        const double v = sinc(pi * x);
        sum += ((k == 0 || k == m) ? 1 : (k % 2 ? 4 : 2)) * v * v;
    }
    sum *= h / 3;
    EXPECT_NEAR(res.c, sum, 1e-4); // truncation of the total at |x| = 4000
    EXPECT_NEAR(res.total_min, 1.0, 1e-4);
}

TEST(Concentration, DegenerateBasisIsRejected)
{
    const Spectrum s{{-1, 1}};
    MassQuadrature mq;
    mq.region = Spectrum{{-5, 5}};
    mq.domain_lo = -100;
    mq.domain_hi = 100;
    mq.bandwidth = 1;
    const std::vector<double> nodes{0.0, 0.0 + 1e-14};
    EXPECT_THROW(concentration_of_subspace(
                     [&](std::span<const double> xs) {
                         CMatrix b = cross_kernel(s, xs, std::vector<double>{0.0});
                         CMatrix two(b.rows(), 2);
                         two << b, b;
                         return two;
                     },
                     mq),
                 Error);
    mq.domain_lo = 0;
    EXPECT_THROW(concentration_of_subspace([&](std::span<const double> xs) { return cross_kernel(s, xs, nodes); }, mq),
                 Error);
}

TEST(Landau, BoundCheck)
{
    const Spectrum s{{-pi, pi}}, q{{0, 10}};
    EXPECT_TRUE(landau_bound_check(10, 1.0, s, q).pass);
    EXPECT_FALSE(landau_bound_check(11, 1.0, s, q).pass);
    EXPECT_NEAR(landau_bound_check(5, 0.5, s, q).bound, 20.0, 1e-12);
    EXPECT_THROW(landau_bound_check(5, 0.0, s, q), Error);
}
