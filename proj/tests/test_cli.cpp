#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kData = TRANSNN_DATA_DIR;

struct Outcome {
    int code = -1;
    std::string out;
};

std::string quote(const std::string& s) { return "'" + s + "'"; }

Outcome run(const std::vector<std::string>& args) {
    std::string cmd = quote(TRANSNN_CLI_PATH);
    for (const auto& a : args) cmd += " " + quote(a);
    cmd += " 2>&1";
    Outcome r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        root_ = fs::temp_directory_path() / ("transnn_cli_" + std::string(
            ::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(root_);
        fs::create_directories(root_);
    }
    void TearDown() override { fs::remove_all(root_); }
    std::string dir(const std::string& name) const { return (root_ / name).string(); }

    fs::path root_;
};

}  // namespace

TEST_F(Cli, SimulateWritesOneRowPerNodeAtHorizonZero) {
    const Outcome r = run({"--out-dir", dir("a"), "simulate", "--network", kData + "/star_homogeneous.json",
                       "--p0", "node:0=1", "--horizon", "0"});
    ASSERT_EQ(r.code, 0) << r.out;
    const auto rows = lines(dir("a") + "/trajectory.csv");
    ASSERT_EQ(rows.front(), "step,node,p,s");
    EXPECT_EQ(rows.size(), 1u + 5u);
    EXPECT_EQ(rows[1], "0,0,1,inf");
    EXPECT_TRUE(fs::exists(dir("a") + "/trajectory.gp"));
}

TEST_F(Cli, SimulateTwoNodeStep) {
    const Outcome r = run({"--out-dir", dir("a"), "--format", "json", "simulate", "--network", kData + "/two_node.json",
                       "--p0", "node:0=1", "--horizon", "1"});
    ASSERT_EQ(r.code, 0) << r.out;
    const auto doc = nlohmann::json::parse(slurp(dir("a") + "/trajectory.json"));
    EXPECT_EQ(doc["horizon"], 1);
    EXPECT_DOUBLE_EQ(doc["steps"][1]["p"][0].get<double>(), 0.5);
    EXPECT_DOUBLE_EQ(doc["steps"][1]["p"][1].get<double>(), 0.5);
    EXPECT_EQ(doc["steps"][0]["s"][0], "inf");
}

TEST_F(Cli, ThresholdWording) {
    Outcome r = run({"--out-dir", dir("a"), "threshold", "--network", kData + "/star_homogeneous.json"});
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("radius 0.900000, extinction guaranteed"), std::string::npos) << r.out;
    r = run({"--out-dir", dir("b"), "threshold", "--network", kData + "/zero_w.json"});
    EXPECT_NE(r.out.find("radius 0.000000, extinction guaranteed"), std::string::npos) << r.out;
    r = run({"--out-dir", dir("c"), "threshold", "--network", kData + "/two_node.json"});
    EXPECT_NE(r.out.find("indeterminate at tolerance"), std::string::npos) << r.out;
    const auto doc = nlohmann::json::parse(slurp(dir("a") + "/threshold.json"));
    EXPECT_EQ(doc["verdict"], "extinction guaranteed");
    EXPECT_TRUE(doc["extinction_guaranteed"].get<bool>());
}

TEST_F(Cli, ValidationFailuresExitTwoWithoutOutputs) {
    EXPECT_EQ(run({"--out-dir", dir("a"), "simulate", "--network", kData + "/two_node.json", "--p0", "node:7=1"}).code, 2);
    EXPECT_EQ(run({"--out-dir", dir("b"), "simulate", "--network", dir("missing.json")}).code, 2);
    std::ofstream(dir("bad.json")) << R"({"n":2,"kind":"single","a":[[1,1],[1,0]],"w":[[0,0],[0,0]]})";
    const Outcome r = run({"--out-dir", dir("c"), "threshold", "--network", dir("bad.json")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("a[1][1]"), std::string::npos) << r.out;
    EXPECT_EQ(run({"--out-dir", dir("d"), "train", "--config", kData + "/healing.json"}).code, 2);
    for (const char* d : {"a", "b", "c", "d"}) EXPECT_FALSE(fs::exists(dir(d))) << d;
}

TEST_F(Cli, DomainFailuresExitThree) {
    const Outcome r = run({"--out-dir", dir("a"), "consistency", "--rates", kData + "/rates_single.json",
                       "--self", "linear", "--deltas", "4,0.1"});
    EXPECT_EQ(r.code, 3) << r.out;
    EXPECT_NE(r.out.find("too large"), std::string::npos) << r.out;
    EXPECT_FALSE(fs::exists(dir("a")));
}

TEST_F(Cli, OdeAndConsistencyTables) {
    ASSERT_EQ(run({"--out-dir", dir("a"), "ode", "--rates", kData + "/healing.json", "--p0", "all=0.8"}).code, 0);
    const auto rows = lines(dir("a") + "/ode.csv");
    EXPECT_EQ(rows.front(), "t,node,p");
    EXPECT_EQ(rows.size(), 1u + 101u);
    const double last = std::stod(rows.back().substr(rows.back().rfind(',') + 1));
    EXPECT_NEAR(last, 0.8 * std::exp(-1.0), 1e-8);

    ASSERT_EQ(run({"--out-dir", dir("b"), "consistency", "--rates", kData + "/rates_zero.json"}).code, 0);
    const auto table = lines(dir("b") + "/consistency.csv");
    EXPECT_EQ(table.front(), "delta,sup_error,order_estimate");
    EXPECT_EQ(table.size(), 5u);
    for (std::size_t i = 1; i < table.size(); ++i) EXPECT_NE(table[i].find(",0,"), std::string::npos) << table[i];
}

TEST_F(Cli, ZeroLearningRateKeepsCheckpoint) {
    const Outcome r = run({"--out-dir", dir("a"), "train", "--config", kData + "/zero_lr_config.json", "--compare"});
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(slurp(dir("a") + "/checkpoint_initial.json"), slurp(dir("a") + "/checkpoint_final.json"));
    EXPECT_EQ(lines(dir("a") + "/training_log.csv").front(), "epoch,train_loss,val_loss");
    const auto cmp = lines(dir("a") + "/activation_comparison.csv");
    EXPECT_EQ(cmp.front(), "epoch,TPsi,TPhi,fixed-Psi,fixed-Phi,relu-equivalent");
    EXPECT_EQ(cmp.size(), 1u + 5u);
}

TEST_F(Cli, ManifestRecordsInputsAndOutputs) {
    ASSERT_EQ(run({"--seed", "4", "--out-dir", dir("a"), "simulate", "--network", kData + "/ring.csv", "--p0",
                   "uniform-random(9)", "--horizon", "3"})
                  .code,
              0);
    const auto m = nlohmann::json::parse(slurp(dir("a") + "/manifest.json"));
    EXPECT_EQ(m["tool"], "transnn");
    EXPECT_EQ(m["command"], "simulate");
    EXPECT_EQ(m["seed"], 4);
    EXPECT_EQ(m["config"]["horizon"], 3);
    ASSERT_EQ(m["inputs"].size(), 1u);
    // independent digest from coreutils
    FILE* pipe = popen(("sha256sum " + quote(kData + "/ring.csv")).c_str(), "r");
    ASSERT_NE(pipe, nullptr);
    char digest[65] = {};
    ASSERT_EQ(std::fread(digest, 1, 64, pipe), 64u);
    pclose(pipe);
    EXPECT_EQ(m["inputs"][0]["sha256"], std::string(digest));
    for (const auto& out : m["outputs"]) EXPECT_TRUE(fs::exists(out.get<std::string>())) << out;
}

TEST_F(Cli, RerunsAreBitwiseIdentical) {
    for (const char* d : {"a", "b"}) {
        ASSERT_EQ(run({"--seed", "11", "--out-dir", dir(d), "train", "--samples", "60", "--config",
                       kData + "/train_config.json"})
                      .code,
                  0);
    }
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(dir("a"))) {
        const auto name = entry.path().filename();
        if (name == "manifest.json") continue;
        EXPECT_EQ(slurp(entry.path()), slurp(fs::path(dir("b")) / name)) << name;
        ++compared;
    }
    EXPECT_GE(compared, 4u);
}

TEST_F(Cli, ApproxLadder) {
    const Outcome r = run({"--out-dir", dir("a"), "approx", "--target", "sin", "--widths", "2,4", "--epochs", "40",
                       "--train-points", "32", "--eval-points", "101", "--rational"});
    ASSERT_EQ(r.code, 0) << r.out;
    const auto rows = lines(dir("a") + "/ladder_sin.csv");
    EXPECT_EQ(rows.front(), "width,sup_error,train_mse,rational_sup_error,sup_error_change,perturbation_bound");
    EXPECT_EQ(rows.size(), 3u);
    EXPECT_TRUE(fs::exists(dir("a") + "/model_sin_w4.json"));
    EXPECT_EQ(run({"--out-dir", dir("b"), "approx", "--b", "0"}).code, 2);
    EXPECT_EQ(run({"--out-dir", dir("c"), "approx", "--target", "tan"}).code, 2);
}

TEST_F(Cli, ValidateSubcommand) {
    Outcome r = run({"validate", "--network", kData + "/modulated_pair.json", "--rates", kData + "/rates_multi.json",
                 "--config", kData + "/train_config.json"});
    EXPECT_EQ(r.code, 0) << r.out;
    r = run({"validate", "--network", kData + "/two_node.json", "--rates", kData + "/two_node.json"});
    EXPECT_EQ(r.code, 2) << r.out;
    EXPECT_EQ(run({"frobnicate"}).code, 2);
}
