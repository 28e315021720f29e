#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
    static const fs::path dir = [] {
        const fs::path p = fs::temp_directory_path() / "eql_test_cli";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

int run(const std::string& args, std::string* out = nullptr) {
    const fs::path log = workdir() / "stdout.txt";
    const std::string cmd = std::string(EQL_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (out) {
        std::ifstream in(log);
        std::stringstream ss;
        ss << in.rdbuf();
        *out = ss.str();
    }
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Ledger text with the wall-clock column blanked.
std::string ledger_without_time(const fs::path& p) {
    std::ifstream in(p);
    std::string line, out;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() >= 8) cells[7].clear();
        for (const auto& c : cells) out += c + ",";
        out += '\n';
    }
    return out;
}

std::string data_dir() {
    static const std::string dir = [] {
        const std::string d = (workdir() / "division").string();
        REQUIRE(run("gen-data division --n 300 --seed 2 --out " + d) == 0);
        return d;
    }();
    return dir;
}

const std::string kSmallGrid = " --lambda-grid 1e-4,1e-3 --depths 2 --seeds 2 --epochs 40 --penalty-interval 10";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors") {
    CHECK(run("") == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("gen-data") == 2);
    CHECK(run("grid " + data_dir() + " --epochs notanumber") == 2);
    CHECK(run("--help") == 0);
}

TEST_CASE("unknown task") {
    std::string out;
    CHECK(run("gen-data F9 --out " + (workdir() / "f9").string(), &out) == 3);
    CHECK(out.find("F9") != std::string::npos);
}

TEST_CASE("missing and malformed inputs") {
    CHECK(run("extract " + (workdir() / "nothing.eql").string()) == 4);
    CHECK(run("eval " + (workdir() / "nothing.eql").string() + " " + data_dir()) == 4);
    const fs::path bad = workdir() / "bad.eql";
    std::ofstream(bad) << "this is not a network\n";
    CHECK(run("extract " + bad.string()) == 5);
    const fs::path bad_ledger = workdir() / "bad_ledger.csv";
    std::ofstream(bad_ledger) << "# eql-ledger v9\n";
    CHECK(run("select " + bad_ledger.string() + " vint-s") == 5);
}

TEST_CASE("config files") {
    const fs::path cfg = workdir() / "grid.cfg";
    std::ofstream(cfg) << "bogus = 3\n";
    std::string out;
    CHECK(run("grid " + data_dir() + " --config " + cfg.string() + " --out " + (workdir() / "g_bad").string(), &out) ==
          2);
    CHECK(out.find("bogus") != std::string::npos);

    std::ofstream(cfg) << "# small run\nepochs_per_layer = 20\npenalty-interval = 10\nlambda_grid = 1e-3\nseeds = 1\n";
    const fs::path out_dir = workdir() / "g_cfg";
    REQUIRE(run("grid " + data_dir() + " --config " + cfg.string() + " --out " + out_dir.string()) == 0);
    CHECK(fs::exists(out_dir / "ledger.csv"));
}

TEST_CASE("grid, select, extract and eval") {
    const std::string out_dir = (workdir() / "grid_a").string();
    REQUIRE(run("grid " + data_dir() + kSmallGrid + " --out " + out_dir) == 0);
    CHECK(fs::exists(fs::path(out_dir) / "ledger.csv"));
    CHECK(fs::exists(fs::path(out_dir) / "nets" / "cand_0003.eql"));

    std::string out;
    REQUIRE(run("select " + out_dir + "/ledger.csv vint-ex", &out) == 0);
    CHECK(out.find("selected") != std::string::npos);
    CHECK(fs::exists(fs::path(out_dir) / "selection.json"));
    CHECK(run("select " + out_dir + "/ledger.csv sideways") == 2);

    const std::string net = out_dir + "/nets/cand_0000.eql";
    REQUIRE(run("extract " + net, &out) == 0);
    CHECK_FALSE(out.empty());
    CHECK(fs::exists(net + ".json"));
    REQUIRE(run("eval " + net + " " + data_dir() + " --plot " + (workdir() / "slice.dat").string(), &out) == 0);
    CHECK(out.find("interp_rms") != std::string::npos);
    CHECK(out.find("extrap_rms") != std::string::npos);
    CHECK(fs::exists(workdir() / "slice.dat"));
}

TEST_CASE("selection without extrapolation column") {
    const fs::path ledger = workdir() / "no_vex.csv";
    std::ofstream(ledger) << "# eql-ledger v1\nlambda,layers,seed,v_int,v_ex,sparsity,final_loss,wall_seconds,failed,"
                             "network\n0.0001,2,0,0.1,,3,0.1,1,0,a.eql\n";
    CHECK(run("select " + ledger.string() + " vint-ex") == 6);
    CHECK(run("select " + ledger.string() + " vint-s") == 0);
}

TEST_CASE("reruns are byte-identical") {
    const fs::path a = workdir() / "det_a", b = workdir() / "det_b";
    REQUIRE(run("grid " + data_dir() + kSmallGrid + " --jobs 1 --out " + a.string()) == 0);
    REQUIRE(run("grid " + data_dir() + kSmallGrid + " --jobs 2 --out " + b.string()) == 0);
    CHECK(ledger_without_time(a / "ledger.csv") == ledger_without_time(b / "ledger.csv"));
    for (int i = 0; i < 4; ++i) {
        const std::string f = "nets/cand_000" + std::to_string(i) + ".eql";
        CHECK(slurp(a / f) == slurp(b / f));
    }
    std::string sa, sb;
    REQUIRE(run("select " + (a / "ledger.csv").string() + " vint-s --report " + (a / "s.json").string(), &sa) == 0);
    REQUIRE(run("select " + (b / "ledger.csv").string() + " vint-s --report " + (b / "s.json").string(), &sb) == 0);
    CHECK(slurp(a / "s.json") == slurp(b / "s.json"));

    const fs::path d2 = workdir() / "division_again";
    REQUIRE(run("gen-data division --n 300 --seed 2 --out " + d2.string()) == 0);
    CHECK(slurp(fs::path(data_dir()) / "train.csv") == slurp(d2 / "train.csv"));
}

TEST_CASE("output directory from the environment") {
    const fs::path root = workdir() / "envroot";
    const std::string cmd = "EQL_OUTPUT_DIR=" + root.string() + " " + EQL_CLI_PATH +
                            " gen-data F2 --n 100 --out data/F2 > /dev/null 2>&1";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(root / "data" / "F2" / "manifest.json"));
}

TEST_CASE("control commands") {
    const fs::path dir = workdir() / "cartpole";
    REQUIRE(run("control collect --rollouts 2 --steps 50 --seed 1 --out " + dir.string()) == 0);
    CHECK(fs::exists(dir / "rollout_train_1.csv"));
    CHECK(fs::exists(dir / "rollout_validation.csv"));
    std::string out;
    REQUIRE(run("control run --truth --steps 5 --samples 20 --horizon 5 --log " + (dir / "ep.csv").string(), &out) ==
            0);
    CHECK(out.find("R = ") != std::string::npos);
    CHECK(fs::exists(dir / "ep.csv"));
    CHECK(run("control run --steps 5") == 2);
}

}  // TEST_SUITE
