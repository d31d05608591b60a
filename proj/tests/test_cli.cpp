#include <cstdlib>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "v2xalloc/cli.hpp"

using v2x::run_cli;
using v2x::testing::scratch_dir;
using v2x::testing::slurp;
using v2x::testing::spit;

namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path write_config(const fs::path& dir, int m, int k, const std::string& extra = "") {
    const fs::path p = dir / "cfg.txt";
    spit(p, "m_cellular = " + std::to_string(m) + "\nk_v2v = " + std::to_string(k) +
                "\npmax_c = 1\npmax_v = 1\nnoise_var = 0.1\nchannel_mode = IID_EXPONENTIAL\n" + extra);
    return p;
}

// Drops the timing columns (last two) of per_sample.csv.
std::string strip_timing(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, kept;
    while (std::getline(in, line)) {
        for (int i = 0; i < 2; ++i) line = line.substr(0, line.rfind(','));
        kept += line + "\n";
    }
    return kept;
}

}  // namespace

TEST(Cli, GenDataIsReproducibleAndWorkerIndependent) {
    const fs::path dir = scratch_dir();
    const std::string cfg = write_config(dir, 2, 3).string();
    const CliRun a = cli({"gen-data", "--config", cfg, "--samples", "100", "--seed", "7", "--out", (dir / "a.csv").string()});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_NE(a.out.find("# resolved system configuration"), std::string::npos);
    EXPECT_NE(a.out.find("seed = 7"), std::string::npos) << a.out;
    EXPECT_NE(a.out.find("wrote 100 samples (0 not converged)"), std::string::npos) << a.out;
    ASSERT_EQ(cli({"gen-data", "--config", cfg, "--samples", "100", "--seed", "7", "--out", (dir / "b.csv").string()}).code, 0);
    ASSERT_EQ(cli({"gen-data", "--config", cfg, "--samples", "100", "--seed", "7", "--workers", "4", "--out", (dir / "c.csv").string()}).code, 0);
    EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
    EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "c.csv"));
}

TEST(Cli, MissingConfigKeyIsNamed) {
    const fs::path dir = scratch_dir();
    spit(dir / "cfg.txt", "m_cellular = 2\nk_v2v = 2\npmax_c = 1\npmax_v = 1\nchannel_mode = IID_EXPONENTIAL\n");
    const CliRun r = cli({"gen-data", "--config", (dir / "cfg.txt").string(), "--samples", "3", "--out", (dir / "d.csv").string()});
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.err.find("noise_var"), std::string::npos) << r.err;
    EXPECT_FALSE(fs::exists(dir / "d.csv"));
}

TEST(Cli, UnknownFlagRejected) {
    const CliRun r = cli({"solve", "--config", "x", "--bogus", "1"});
    EXPECT_NE(r.code, 0);
    EXPECT_NE(cli({}).code, 0);
}

TEST(Cli, TrainEchoesCompactInputWidthAndAccountsSteps) {
    const fs::path dir = scratch_dir();
    const std::string cfg = write_config(dir, 8, 10, "feature_layout = PAPER_COMPAT\n").string();
    ASSERT_EQ(cli({"gen-data", "--config", cfg, "--samples", "50", "--out", (dir / "d.csv").string()}).code, 0);
    const CliRun r = cli({"train", "--data", (dir / "d.csv").string(), "--config", cfg, "--out",
                       (dir / "m.txt").string(), "--epochs", "1", "--batch-size", "45"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("input_width = 98\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("layers = 98,50,22,20,18\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("optimizer steps = 1\n"), std::string::npos) << r.out;
    EXPECT_TRUE(fs::exists(dir / "m.txt"));
    EXPECT_TRUE(fs::exists(dir / "m.txt.report.csv"));

    const CliRun too_big = cli({"train", "--data", (dir / "d.csv").string(), "--out", (dir / "n.txt").string(), "--batch-size", "46"});
    EXPECT_NE(too_big.code, 0);
    EXPECT_NE(too_big.err.find("batch"), std::string::npos) << too_big.err;
}

TEST(Cli, ZeroLearningRateGivesFlatCurve) {
    const fs::path dir = scratch_dir();
    const std::string cfg = write_config(dir, 2, 2).string();
    ASSERT_EQ(cli({"gen-data", "--config", cfg, "--samples", "100", "--out", (dir / "d.csv").string()}).code, 0);
    ASSERT_EQ(cli({"train", "--data", (dir / "d.csv").string(), "--out", (dir / "m.txt").string(), "--lr", "0",
                   "--epochs", "3", "--batch-size", "10", "--report", (dir / "r.csv").string()}).code, 0);
    std::istringstream in(slurp(dir / "r.csv"));
    std::string line;
    std::getline(in, line);
    std::set<std::string> train_mse;
    while (std::getline(in, line)) {
        const auto a = line.find(',');
        train_mse.insert(line.substr(a + 1, line.find(',', a + 1) - a - 1));
    }
    EXPECT_EQ(train_mse.size(), 1u);
}

TEST(Cli, XvalWritesCellsAndSummary) {
    const fs::path dir = scratch_dir();
    const std::string cfg = write_config(dir, 2, 2).string();
    ASSERT_EQ(cli({"gen-data", "--config", cfg, "--samples", "120", "--out", (dir / "d.csv").string()}).code, 0);
    const CliRun r = cli({"xval", "--data", (dir / "d.csv").string(), "--out", (dir / "x").string(), "--hidden", "6",
                       "--batch-sizes", "10,50", "--lrs", "0.001,0.03", "--epochs", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {"cell_b10_lr0.001.csv", "cell_b50_lr0.001.csv", "cell_b10_lr0.03.csv",
                          "cell_b50_lr0.03.csv", "summary.csv"})
        EXPECT_TRUE(fs::exists(dir / "x" / f)) << f;
    const std::string summary = slurp(dir / "x" / "summary.csv");
    EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 5);
}

TEST(Cli, EvalEndToEndAndDeterminism) {
    const fs::path dir = scratch_dir();
    const std::string cfg = write_config(dir, 2, 3).string();
    ASSERT_EQ(cli({"gen-data", "--config", cfg, "--samples", "200", "--seed", "1", "--out", (dir / "train.csv").string()}).code, 0);
    ASSERT_EQ(cli({"gen-data", "--config", cfg, "--samples", "50", "--seed", "2", "--out", (dir / "test.csv").string()}).code, 0);
    ASSERT_EQ(cli({"train", "--data", (dir / "train.csv").string(), "--out", (dir / "m.txt").string(),
                   "--hidden", "10,5", "--epochs", "3", "--batch-size", "20"}).code, 0);
    for (const char* sub : {"e1", "e2"}) {
        const CliRun r = cli({"eval", "--data", (dir / "test.csv").string(), "--model", (dir / "m.txt").string(),
                           "--config", cfg, "--out", (dir / sub).string(), "--timing"});
        ASSERT_EQ(r.code, 0) << r.err;
        EXPECT_NE(r.out.find("mean inference"), std::string::npos);
    }
    for (const char* f : {"cdf_dnn.csv", "cdf_wmmse.csv", "pdf_dnn.csv", "pdf_wmmse.csv"})
        EXPECT_EQ(slurp(dir / "e1" / f), slurp(dir / "e2" / f)) << f;
    EXPECT_EQ(strip_timing(slurp(dir / "e1" / "per_sample.csv")), strip_timing(slurp(dir / "e2" / "per_sample.csv")));

    std::istringstream rows(slurp(dir / "e1" / "per_sample.csv"));
    std::string line;
    std::getline(rows, line);
    EXPECT_EQ(line, "index,dnn_rate,wmmse_rate,power_mse,infer_us,solve_us");
    std::getline(rows, line);
    EXPECT_NE(line.back(), ',');

    const std::string summary = slurp(dir / "e1" / "summary.csv");
    const auto at = summary.find("mean_ratio,");
    ASSERT_NE(at, std::string::npos);
    EXPECT_LE(std::stod(summary.substr(at + 11)), 1.0 + 1e-9);
}

TEST(Cli, EvalShapeErrorNamesWidths) {
    const fs::path dir = scratch_dir();
    ASSERT_EQ(cli({"gen-data", "--config", write_config(dir, 2, 3).string(), "--samples", "30", "--out", (dir / "a.csv").string()}).code, 0);
    ASSERT_EQ(cli({"train", "--data", (dir / "a.csv").string(), "--out", (dir / "m.txt").string(), "--hidden", "4",
                   "--epochs", "1", "--batch-size", "5"}).code, 0);
    fs::create_directories(dir / "b");
    ASSERT_EQ(cli({"gen-data", "--config", write_config(dir / "b", 2, 3, "feature_layout = PAPER_COMPAT\n").string(),
                   "--samples", "5", "--out", (dir / "b.csv").string()}).code, 0);
    const CliRun r = cli({"eval", "--data", (dir / "b.csv").string(), "--model", (dir / "m.txt").string(), "--out", (dir / "e").string()});
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.err.find("23"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("11"), std::string::npos) << r.err;
}

TEST(Cli, SolveSingleLinkAndGrid) {
    const fs::path dir = scratch_dir();
    const CliRun one = cli({"solve", "--config", write_config(dir, 1, 0).string(), "--seed", "3"});
    ASSERT_EQ(one.code, 0) << one.err;
    EXPECT_NE(one.out.find("pc = 1\n"), std::string::npos) << one.out;
    EXPECT_EQ(one.out, cli({"solve", "--config", write_config(dir, 1, 0).string(), "--seed", "3"}).out);

    const CliRun grid = cli({"solve", "--config", write_config(dir, 1, 1).string(), "--seed", "5", "--grid", "201"});
    ASSERT_EQ(grid.code, 0) << grid.err;
    const auto at = grid.out.find("wmmse/grid = ");
    ASSERT_NE(at, std::string::npos);
    EXPECT_GE(std::stod(grid.out.substr(at + 13)), 0.99);

    const CliRun refused = cli({"solve", "--config", write_config(dir, 2, 2).string(), "--grid", "11"});
    EXPECT_EQ(refused.code, 2);
    EXPECT_NE(refused.err.find("limits"), std::string::npos);
}

TEST(Cli, BinaryExitCodes) {
    const fs::path dir = scratch_dir();
    const std::string bin = V2XALLOC_CLI_PATH;
    const std::string cfg = write_config(dir, 1, 1).string();
    const std::string sink = " > " + (dir / "log").string() + " 2>&1";
    EXPECT_EQ(std::system((bin + " solve --config " + cfg + sink).c_str()), 0);
    EXPECT_NE(std::system((bin + " solve --config " + (dir / "nope").string() + sink).c_str()), 0);
    EXPECT_NE(std::system((bin + " frobnicate" + sink).c_str()), 0);
}
