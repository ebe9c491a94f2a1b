#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "cli_app.hpp"
#include "test_support.hpp"

using namespace jacobi_scatter;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "jacobi-scatter");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

} // namespace

TEST(Cli, GreenFreeValue) {
    const auto r = run_cli({"green", "--energy-re", "3"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("-0.4472135954999579"), std::string::npos) << r.out;
}

TEST(Cli, GreenJsonRoundTrip) {
    const auto r = run_cli({"green", "--energy-re", "3", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_DOUBLE_EQ(j["value"]["re"][0][0].get<double>(), -1.0 / std::sqrt(5.0));
}

TEST(Cli, BandEdgeIsValidationError) {
    const auto r = run_cli({"jost", "--z-re", "1", "--z-im", "0"});
    EXPECT_EQ(r.code, cli::kValidation);
    EXPECT_FALSE(r.err.empty());
}

TEST(Cli, ParseErrorsExitOne) {
    EXPECT_EQ(run_cli({"green", "--energy-re", "3", "--format", "xml"}).code, 1);
    EXPECT_EQ(run_cli({"nonsense"}).code, 1);
    EXPECT_EQ(run_cli({"green"}).code, 1);
    EXPECT_EQ(run_cli({"green", "--energy-re", "0.5"}).code, cli::kValidation);
    EXPECT_EQ(run_cli({"--potential", "/nonexistent.json", "green", "--energy-re", "3"}).code, cli::kValidation);
}

TEST(Cli, VerifyAllPassesForFree) {
    const auto r = run_cli({"verify", "--suite", "all"});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
}

TEST(Cli, OutputIndependentOfThreads) {
    const std::string path = temp_path("jacobi_scatter_cli_pot.json");
    save_potential(fixtures::random_potential(2), path);
    std::string first;
    for (const char* th : {"1", "4", "8"}) {
        const auto r = run_cli({"--potential", path, "--threads", th, "decay", "--tmin", "5", "--tmax", "40",
                                "--samples", "5", "--window", "100"});
        ASSERT_EQ(r.code, 0) << r.err;
        if (first.empty()) first = r.out;
        EXPECT_EQ(r.out, first) << "threads " << th;
    }
    std::filesystem::remove(path);
}

TEST(Cli, EvolveBothAgree) {
    const auto r = run_cli({"evolve", "--t", "2", "--s", "1", "--r", "0", "--method", "both"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("kgrid"), std::string::npos);
    EXPECT_NE(r.out.find("fourier_bessel"), std::string::npos);
}

TEST(Cli, OutputFile) {
    const std::string path = temp_path("jacobi_scatter_cli_out.csv");
    const auto r = run_cli({"--output", path, "green-boundary", "--energy", "0"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_NE(ss.str().find("re_11"), std::string::npos);
    EXPECT_NE(ss.str().find("0.5"), std::string::npos);
    std::filesystem::remove(path);
}

TEST(Cli, ScatterAndLapRun) {
    EXPECT_EQ(run_cli({"scatter", "--grid", "16"}).code, 0);
    EXPECT_EQ(run_cli({"lap", "--alpha", "1.5", "--rho", "0.5", "--window", "10"}).code, 0);
    EXPECT_EQ(run_cli({"lap", "--alpha", "0.8", "--rho", "0.5"}).code, cli::kValidation);
}
