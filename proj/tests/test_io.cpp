#include <gtest/gtest.h>

#include "pwdens/io.hpp"

using namespace pwdens;
using io::json;

namespace {

std::string error_of(const std::string& text)
{
    try {
        io::parse_instance(json::parse(text));
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST(Instance, ParsesFullDocument)
{
    const auto inst = io::parse_instance(json::parse(R"({
        "id": "demo",
        "spectrum": [[1, 2], [-2, -1]],
        "points": {"kind": "union", "parts": [
            {"kind": "arithmetic", "step": 2, "offset": 0.5, "range": [-50, 50]},
            {"kind": "jitter", "step": 2, "max_jitter": 0.1, "seed": 9, "range": [-50, 50]}]},
        "params": {"alpha": 1.5, "delta": 0.1, "epsilon": 0.2, "mu_grid": [1e-4, 1],
                   "radii": [5, 10], "growth": {"C": 3, "gamma": 0.4}, "beta": 0.6}
    })"));
    EXPECT_EQ(inst.id, "demo");
    EXPECT_EQ(inst.spectrum.size(), 2u);
    EXPECT_DOUBLE_EQ(inst.spectrum.lower(), -2.0);
    EXPECT_EQ(inst.points.size(), 101u);
    EXPECT_DOUBLE_EQ(*inst.alpha, 1.5);
    EXPECT_EQ(inst.mu_grid.size(), 2u);
    ASSERT_TRUE(inst.growth);
    EXPECT_DOUBLE_EQ(inst.growth->gamma, 0.4);
    EXPECT_DOUBLE_EQ(effective_beta(inst), 0.6);

    // Descriptors serialize back to an equivalent instance.
    const json again = {{"spectrum", io::to_json(inst.spectrum)}, {"points", io::to_json(inst.points.descriptor())}};
    const auto round = io::parse_instance(again);
    EXPECT_EQ(std::vector<double>(round.points.points().begin(), round.points.points().end()),
              std::vector<double>(inst.points.points().begin(), inst.points.points().end()));
}

TEST(Instance, DefaultsWhenParamsMissing)
{
    const auto inst = io::parse_instance(
        json::parse(R"({"spectrum": [[-1, 1]], "points": {"kind": "explicit", "values": [0, 1, 2.5]}, "params": {"growth": null}})"));
    EXPECT_EQ(inst.radii, (std::vector<double>{25, 50, 100}));
    EXPECT_EQ(inst.mu_grid.size(), 6u);
    EXPECT_FALSE(inst.growth);
    EXPECT_DOUBLE_EQ(inst.delta, 0.05);
}

TEST(Instance, DiagnosticsNameTheField)
{
    EXPECT_NE(error_of(R"({"spectrum": [[-1, 1]]})").find("'points': missing"), std::string::npos);
    EXPECT_NE(error_of(R"({"spectrum": [[2, 1]], "points": {"kind": "explicit", "values": [0]}})")
                  .find("spectrum[0] = [2, 1]"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"spectrum": [[-1, 1]], "points": {"kind": "grid"}})").find("points.kind"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"spectrum": [[-1, 1]], "points": {"kind": "arithmetic", "step": "x", "range": [0, 1]}})")
                  .find("points.step"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"spectrum": [[-1, 1]], "points": {"kind": "explicit", "values": [0]},
                          "params": {"alpha": "big"}})")
                  .find("params.alpha"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"spectrum": [[-1, 1]], "points": {"kind": "union", "parts": [{"kind": "explicit"}]}})")
                  .find("points.parts[0].values"),
              std::string::npos);
}

TEST(Instance, ParseErrorsCarryLineNumbers)
{
    const std::string path = ::testing::TempDir() + "broken.json";
    {
        std::ofstream out(path);
        out << "{\n  \"spectrum\": [[-1, 1]],\n  \"points\": {\"kind\": \n";
    }
    try {
        io::load_instance(path);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::schema);
        EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
    }
}

TEST(Instance, BundledInstancesLoad)
{
    for (const char* name : {"sharp_half", "landau", "one_sided", "two_band_jitter"}) {
        const auto inst = io::load_instance(std::string(PWDENS_INSTANCE_DIR) + "/" + name + ".json");
        EXPECT_EQ(inst.id, name);
    }
}

TEST(Matrix, CsvRoundTripIsExact)
{
    CMatrix m(2, 3);
    m << cplx(1.0 / 3, -2e-17), cplx(-0.0, 0), cplx(5, 1e300), cplx(std::acos(-1.0), 0.1), cplx(-7, -0.25), 1e-310;
    const auto text = io::matrix_csv(m);
    EXPECT_EQ(io::parse_matrix_csv(text), m);
    EXPECT_EQ(io::parse_cell("2.5-1e-3j"), cplx(2.5, -1e-3));
    EXPECT_THROW(io::parse_cell("abc"), Error);
    EXPECT_THROW(io::parse_matrix_csv("1,2\n3\n"), Error);
}

TEST(Matrix, BinaryDumpRoundTrip)
{
    CMatrix m(3, 2);
    m << cplx(1, 2), cplx(3, -4), cplx(0.5, 0), cplx(-1, 1e-9), cplx(7, 7), cplx(8, 0);
    const auto complex_bytes = io::matrix_dump(m, io::ScalarKind::complex128);
    EXPECT_EQ(complex_bytes.size(), 16u + 6 * 16);
    EXPECT_EQ(complex_bytes.substr(0, 4), "PWDM");
    EXPECT_EQ(io::parse_matrix_dump(complex_bytes), m);

    const CMatrix real = m.real().cast<cplx>();
    const auto real_bytes = io::matrix_dump(real, io::ScalarKind::real64);
    EXPECT_EQ(real_bytes.size(), 16u + 6 * 8);
    EXPECT_EQ(io::parse_matrix_dump(real_bytes), real);
    // Column-major: the second stored value is m(1, 0).
    double second;
    std::memcpy(&second, real_bytes.data() + 24, 8);
    EXPECT_EQ(second, 0.5);

    EXPECT_THROW(io::parse_matrix_dump("XXXX" + real_bytes.substr(4)), Error);
    EXPECT_THROW(io::parse_matrix_dump(real_bytes.substr(0, 30)), Error);
}

TEST(Reports, SweepCsvColumns)
{
    BoundReport r;
    r.instance_id = "x";
    r.mes_s = 2;
    const auto csv = io::sweep_csv({r});
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "instance_id,mes_S,d_hat,norm_sup,density,rhs,slack,sharpness_ratio,mode");
    EXPECT_NE(csv.find("x,2,0,0,0,0,0,0,theorem1-D+"), std::string::npos);
}
