#include <rfvc.hpp>

#include "support/c_interp.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <fstream>
#include <sstream>

using namespace rfvc;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args)
{
    const std::string cmd = std::string(RFVC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

std::size_t line_count(const fs::path& p)
{
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);)
        ++n;
    return n;
}

} // namespace

TEST(Cli, UsageErrors)
{
    EXPECT_NE(run(""), 0);
    EXPECT_NE(run("frobnicate"), 0);
    EXPECT_NE(run("simulate"), 0); // --out is required
    EXPECT_EQ(run("--help"), 0);
}

TEST(Cli, SimulateWritesTracesAndLabels)
{
    fixture::TempDir dir("cli_sim");
    ASSERT_EQ(run("simulate --classes binary --count 2000 --seed 7 --out " + q(dir.path())), 0);
    std::size_t traces = 0;
    for (const auto& e : fs::directory_iterator(dir.path()))
        traces += e.path().filename().string().rfind("trace_", 0) == 0;
    EXPECT_EQ(traces, 2000u);
    std::ifstream in(dir / "labels.csv");
    const auto records = read_labels_csv(in);
    ASSERT_EQ(records.size(), 2000u);
    std::size_t cars = 0;
    for (const auto& r : records)
        cars += r.label == "car-like";
    EXPECT_EQ(cars, 1000u);
}

TEST(Cli, IdleTraceGivesNoEvents)
{
    fixture::TempDir dir("cli_idle");
    TraceBundle b;
    for (std::size_t l = 0; l < kNumLinks; ++l)
        b.rssi_dbm[l].assign(500, -60.0 - static_cast<double>(l));
    b.idle_level_dbm = estimate_idle_levels(b);
    save_trace((dir / "idle.csv").string(), b);
    ASSERT_EQ(run("detect --in " + q(dir / "idle.csv") + " --out " + q(dir / "ev.csv")), 0);
    EXPECT_EQ(oracle::read_file(dir / "ev.csv"), "vehicle_id,link,t_start_ms,t_end_ms,min_level\n");
}

TEST(Cli, ExitCodes)
{
    fixture::TempDir dir("cli_codes");
    {
        std::ofstream bad(dir / "bad.csv");
        bad << "t_ms,link,rssi_dbm\n0,1,abc\n";
        std::ofstream conf(dir / "bad.conf");
        conf << "guard_w = -3\n";
    }
    EXPECT_EQ(run("detect --in " + q(dir / "bad.csv")), 2);
    EXPECT_EQ(run("detect --in " + q(dir / "missing.csv")), 2);
    EXPECT_EQ(run("--config " + q(dir / "bad.conf") + " simulate --count 2 --out " + q(dir / "s")), 3);
    EXPECT_EQ(run("simulate --classes nonsense --count 2 --out " + q(dir / "s")), 3);

    // a forest far beyond the smallest platform's program memory
    const auto d = fixture::blobs(3, 100, 92, 4.0, 9);
    save_model((dir / "big.json").string(),
               train_model(d.rows, d.labels, Taxonomy::size_based(), all_links(), ModelSpec::random_forest(100, 20), 9));
    EXPECT_EQ(run("export --model " + q(dir / "big.json") + " --out " + q(dir / "big.c") + " --platform msp"), 4);
    EXPECT_FALSE(fs::exists(dir / "big.c"));
    EXPECT_EQ(run("export --model " + q(dir / "big.json") + " --out " + q(dir / "big.c") + " --platform esp"), 0);
    EXPECT_TRUE(fs::exists(dir / "big.c"));
}

TEST(Cli, PipelineEndToEnd)
{
    fixture::TempDir dir("cli_pipe");
    const auto sim = dir / "sim";
    ASSERT_EQ(run("--seed 3 simulate --classes binary --count 80 --out " + q(sim)), 0);
    ASSERT_EQ(run("extract --labels " + q(sim / "labels.csv") + " --out " + q(dir / "f.csv")), 0);
    EXPECT_EQ(line_count(dir / "f.csv"), 81u);
    ASSERT_EQ(run("train --features " + q(dir / "f.csv") + " --taxonomy binary --out " + q(dir / "m.json")), 0);
    ASSERT_EQ(run("importance --model " + q(dir / "m.json") + " --out " + q(dir / "imp.csv")), 0);
    EXPECT_EQ(line_count(dir / "imp.csv"), 1u + 10u * 2u); // group x class rows
    ASSERT_EQ(run("export --model " + q(dir / "m.json") + " --out " + q(dir / "m.c") + " --platform msp"), 0);

    // the emitted C agrees with the saved model on the extracted rows
    const auto model = load_model((dir / "m.json").string());
    const cinterp::Program prog(oracle::read_file(dir / "m.c"));
    std::ifstream fin(dir / "f.csv");
    const auto table = read_feature_csv(fin);
    ASSERT_EQ(table.size(), 80u);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const std::vector<double> full(table.rows[i].values.begin(), table.rows[i].values.end());
        const int p = model.predict(oracle::model_input(model, full));
        EXPECT_EQ(prog.call(full), p);
        hits += p == static_cast<int>(Taxonomy::binary().index_of(table.labels[i]));
    }
    EXPECT_GE(hits, 76u);
}

TEST(Cli, EvaluateIsDeterministic)
{
    fixture::TempDir dir("cli_eval");
    const auto table = fixture::simulate_features(binary_templates(), {40, 40}, 8);
    {
        std::ofstream out(dir / "f.csv");
        write_feature_csv(out, table);
    }
    const std::string base = "evaluate --features " + q(dir / "f.csv") + " --taxonomy binary --subsets AH --k 5";
    ASSERT_EQ(run("--seed 5 " + base + " --results " + q(dir / "r1.csv") + " --summary " + q(dir / "s1.csv")), 0);
    ASSERT_EQ(run("--seed 5 --threads 2 " + base + " --results " + q(dir / "r2.csv") + " --summary " +
                  q(dir / "s2.csv")),
              0);
    EXPECT_EQ(oracle::read_file(dir / "r1.csv"), oracle::read_file(dir / "r2.csv"));
    EXPECT_EQ(oracle::read_file(dir / "s1.csv"), oracle::read_file(dir / "s2.csv"));
    EXPECT_EQ(line_count(dir / "s1.csv"), 1u + 2u * 2u); // svm and rf for A and H
}
