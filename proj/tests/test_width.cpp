#include <random>

#include <gtest/gtest.h>

#include "pwdens/width.hpp"

using namespace pwdens;

namespace {

// Columns v_j = e_j + w_j with ||w_j|| = scale_j * d, scale_j in [0.5, 1].
CMatrix perturbed_identity(Eigen::Index n, double d, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.5, 1.0);
    CMatrix t = CMatrix::Identity(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        CVector w(n);
        for (Eigen::Index i = 0; i < n; ++i)
            w[i] = cplx(g(rng), g(rng));
        t.col(j) += w * (u(rng) * d / w.norm());
    }
    return t;
}

CMatrix random_matrix(Eigen::Index n, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    CMatrix m(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            m(i, j) = cplx(g(rng), g(rng));
    return m;
}

} // namespace

TEST(SingularProfile, ReconstructsMatrix)
{
    std::mt19937_64 rng(1);
    const CMatrix m = random_matrix(7, rng);
    const auto p = singular_profile(m);
    const CMatrix rebuilt = p.left_vectors * p.values.asDiagonal() * p.right_vectors.adjoint();
    EXPECT_LT((rebuilt - m).norm(), 1e-12 * m.norm());
    EXPECT_NEAR(hilbert_schmidt_sq(m), p.values.squaredNorm(), 1e-11 * m.squaredNorm());
}

TEST(SvProperties, HoldOnRandomPairs)
{
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        const auto rep = check_sv_properties(random_matrix(8, rng), random_matrix(8, rng), {1, 4, 8}, 10, 100 + trial);
        EXPECT_TRUE(rep.ok()) << "trial " << trial;
        EXPECT_EQ(rep.additivity_checks, 28u);
    }
}

TEST(SvProperties, DetectsBrokenInput)
{
    std::mt19937_64 rng(3);
    EXPECT_THROW(check_sv_properties(random_matrix(4, rng), random_matrix(5, rng), {1}), Error);
    EXPECT_THROW(check_sv_properties(random_matrix(4, rng), random_matrix(4, rng), {0}), Error);
}

TEST(MinGain, TopSubspaceAttainsSingularValue)
{
    std::mt19937_64 rng(4);
    const CMatrix m = random_matrix(12, rng);
    const auto p = singular_profile(m);
    for (Eigen::Index k : {1, 6, 12}) {
        EXPECT_NEAR(min_gain(m, p.right_vectors.leftCols(k)), p.values[k - 1], 1e-10);
        EXPECT_LE(min_gain(m, random_subspace(12, k, rng)), p.values[k - 1] + 1e-10);
    }
}

TEST(ExtractSubspace, GuaranteesOnRandomFamilies)
{
    std::mt19937_64 rng(5);
    for (Eigen::Index n : {30, 80}) {
        for (double d : {0.2, 0.4}) {
            const double alpha = 0.5 * (1 + 1 / d);
            const CMatrix t1 = perturbed_identity(n, d, rng);
            const auto res = extract_subspace(t1, d, alpha);
            const auto k = static_cast<std::size_t>(std::floor((1 - alpha * alpha * d * d) * n));
            EXPECT_GE(res.dim, k);
            EXPECT_GE(res.measured_bound, res.certified_bound - 1e-9);
            EXPECT_TRUE(res.t2_profile_ok);
            EXPECT_GE(res.span_rank, static_cast<std::size_t>(std::ceil((1 - d * d) * n)));
            // Orthonormal basis, and the claimed minimum gain is the true one.
            const CMatrix& x = res.subspace_basis;
            EXPECT_LT((x.adjoint() * x - CMatrix::Identity(x.cols(), x.cols())).norm(), 1e-10);
            EXPECT_NEAR(min_gain(t1, x) * min_gain(t1, x), res.measured_bound, 1e-10);
        }
    }
}

TEST(ExtractSubspace, UnperturbedFamilyKeepsEverything)
{
    const auto res = extract_subspace(CMatrix::Identity(10, 10), 0.0, 2.0);
    EXPECT_EQ(res.dim, 10u);
    EXPECT_NEAR(res.measured_bound, 1.0, 1e-14);
}

TEST(ExtractSubspace, ReportsViolatedPrecondition)
{
    CMatrix t1 = CMatrix::Identity(6, 6);
    t1(0, 4) = 0.5;
    try {
        extract_subspace(t1, 0.3, 1.5);
        FAIL();
    } catch (const PreconditionError& e) {
        EXPECT_EQ(e.index(), 4u);
        EXPECT_NEAR(e.distance(), 0.5, 1e-15);
    }
}

TEST(ExtractSubspace, RejectsBadParameters)
{
    const CMatrix t1 = CMatrix::Identity(6, 6);
    EXPECT_THROW(extract_subspace(t1, 1.0, 1.5), Error);
    EXPECT_THROW(extract_subspace(t1, 0.5, 2.5), Error); // alpha >= 1/d
    EXPECT_THROW(extract_subspace(t1, 0.5, 1.0), Error);
    try {
        extract_subspace(t1, 0.5, 1.9); // (1 - 0.9025) * 6 < 1
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::subspace_too_small);
    }
    EXPECT_THROW(extract_subspace(CMatrix::Identity(3, 4), 0.1, 2.0), Error);
}
