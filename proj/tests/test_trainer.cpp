#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "eql/trainer.hpp"
#include "support.hpp"

using namespace eql;
namespace fs = std::filesystem;

namespace {

const Dataset& small_division() {
    static const Dataset ds = gen_division_task(500, 0.01, 1);
    return ds;
}

TrainConfig short_config(double lambda, std::uint64_t seed = 3) {
    TrainConfig cfg;
    cfg.lambda = lambda;
    cfg.schedule = make_schedule(2, {.total_epochs = 200});
    cfg.seed = seed;
    return cfg;
}

Network small_net(std::uint64_t seed = 11) { return Network::build({2, 2, 1, 30, 10}, seed); }

struct PhaseRecorder : TrainObserver {
    Schedule sch;
    std::vector<EpochReport> reports;
    std::vector<double> params_at_t1;
    std::vector<std::uint8_t> mask_after_l0;
    bool mask_ok = true;
    bool masked_stay_zero = true;
    bool mask_seen = false;

    void on_epoch_end(const EpochReport& r, const Network& net) override {
        reports.push_back(r);
        if (r.epoch == sch.t1 - 1) params_at_t1.assign(net.parameters().begin(), net.parameters().end());
        if (mask_seen) {
            const auto m = net.mask();
            const auto p = net.parameters();
            for (std::size_t i = 0; i < m.size(); ++i) {
                if (m[i] && p[i] != 0.0) masked_stay_zero = false;
            }
        }
    }
    void on_l0_mask(const Network& before, const Network& after) override {
        mask_seen = reports.size() == static_cast<std::size_t>(sch.t2);
        for (int l = 0; l < before.layer_count(); ++l) {
            const auto& s = before.shape(l);
            for (int r = 0; r < s.rows; ++r) {
                for (int c = 0; c < s.cols; ++c) {
                    const double w = before.weight(l, r, c);
                    const double a = after.weight(l, r, c);
                    if (std::abs(w) < 0.001 ? a != 0.0 : a != w) mask_ok = false;
                }
            }
        }
    }
};

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("schedule boundaries") {
    const Schedule s = make_schedule(2, {.epochs_per_layer = kFullEpochsPerLayer});
    CHECK(s.total_epochs == 10000);
    CHECK(s.t1 == 2500);
    CHECK(s.t2 == 9500);
    CHECK(make_schedule(3).total_epochs == 4000);
    CHECK(make_schedule(3, {.epochs_per_layer = 10000}).total_epochs == 20000);
    CHECK(make_schedule(4, {.total_epochs = 400}).t2 == 380);
    CHECK_THROWS_AS(make_schedule(2, {.total_epochs = 3}), std::invalid_argument);
    CHECK_THROWS_AS(make_schedule(2, {.batch_size = 0}), std::invalid_argument);
    CHECK(s.is_penalty_epoch(49));
    CHECK_FALSE(s.is_penalty_epoch(50));
    CHECK(s.lambda_at(2499, 0.1) == 0.0);
    CHECK(s.lambda_at(2500, 0.1) == 0.1);
    CHECK(s.lambda_at(9500, 0.1) == 0.0);
}

TEST_CASE("default lambda grid") {
    const auto g = default_lambda_grid();
    REQUIRE(g.size() == 26);
    CHECK(g.front() == doctest::Approx(1e-6));
    CHECK(g.back() == doctest::Approx(std::pow(10.0, -3.5)));
}

TEST_CASE("phase invariants hold during training") {
    PhaseRecorder rec;
    const TrainConfig cfg = short_config(1e-3);
    rec.sch = cfg.schedule;
    const Candidate c = train(small_net(), small_division(), cfg, &rec);
    REQUIRE_FALSE(c.metrics.failed);
    REQUIRE(rec.reports.size() == 200);
    for (const auto& r : rec.reports) {
        CHECK(r.theta == 1.0 / std::sqrt(r.epoch + 1.0));
        if (r.epoch < cfg.schedule.t1 || r.epoch >= cfg.schedule.t2 || r.penalty_epoch) CHECK(r.lambda == 0.0);
        else CHECK(r.lambda == 1e-3);
        CHECK(r.penalty_epoch == ((r.epoch + 1) % 50 == 0));
    }
    CHECK(rec.mask_seen);
    CHECK(rec.mask_ok);
    CHECK(rec.masked_stay_zero);
    CHECK(c.network.l0_applied());
    CHECK(c.metrics.v_int == evaluate(c.network, small_division().validation, 1e-4));
    CHECK(c.metrics.sparsity == sparsity(c.network));
}

TEST_CASE("no L1 before t1: trajectories agree bit for bit across lambda") {
    PhaseRecorder a, b;
    const TrainConfig ca = short_config(1e-5), cb = short_config(1e-1);
    a.sch = ca.schedule;
    b.sch = cb.schedule;
    (void)train(small_net(), small_division(), ca, &a);
    (void)train(small_net(), small_division(), cb, &b);
    REQUIRE_FALSE(a.params_at_t1.empty());
    CHECK(a.params_at_t1 == b.params_at_t1);
    CHECK(a.reports.back().mean_loss != b.reports.back().mean_loss);
}

TEST_CASE("strong L1 prunes the network") {
    const Candidate weak = train(small_net(), small_division(), short_config(1e-6));
    const Candidate strong = train(small_net(), small_division(), short_config(1.0));
    CHECK(strong.metrics.sparsity < weak.metrics.sparsity);
    CHECK(strong.masked_weights > weak.masked_weights);
}

TEST_CASE("training is deterministic") {
    const Candidate a = train(small_net(), small_division(), short_config(1e-4));
    const Candidate b = train(small_net(), small_division(), short_config(1e-4));
    CHECK(std::vector<double>(a.network.parameters().begin(), a.network.parameters().end()) ==
          std::vector<double>(b.network.parameters().begin(), b.network.parameters().end()));
    CHECK(a.metrics.v_int == b.metrics.v_int);
}

TEST_CASE("divergence yields a failed candidate") {
    Dataset ds = small_division();
    ds.train.targets(0, 0) = std::numeric_limits<double>::quiet_NaN();
    const Candidate c = train(small_net(), ds, short_config(1e-4));
    CHECK(c.metrics.failed);
    CHECK(std::isinf(c.metrics.v_int));
    CHECK(std::isinf(c.metrics.sparsity));
    CHECK_FALSE(c.failure.empty());
}

TEST_CASE("mismatched dimensions are rejected") {
    CHECK_THROWS_AS(train(Network::build({2, 3, 1, 30, 10}, 1), small_division(), short_config(0)),
                    std::invalid_argument);
}

TEST_CASE("grid order and content do not depend on the worker count") {
    GridSpec spec;
    spec.lambdas = {1e-4, 1e-3};
    spec.depths = {2};
    spec.seeds = 2;
    spec.master_seed = 5;
    spec.overrides.total_epochs = 40;
    spec.overrides.penalty_interval = 10;
    spec.jobs = 1;
    const auto serial = run_grid(small_division(), spec);
    spec.jobs = 3;
    const auto parallel = run_grid(small_division(), spec);
    REQUIRE(serial.size() == 4);
    REQUIRE(parallel.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(serial[i].metrics.lambda == spec.lambdas[i / 2]);
        CHECK(serial[i].metrics.seed == static_cast<int>(i % 2));
        CHECK(serial[i].init_seed == parallel[i].init_seed);
        CHECK(serial[i].metrics.v_int == parallel[i].metrics.v_int);
        CHECK(serial[i].metrics.sparsity == parallel[i].metrics.sparsity);
    }
    CHECK(serial[0].init_seed != serial[1].init_seed);
}

TEST_CASE("ledger round trip") {
    const fs::path p = fs::temp_directory_path() / "eql_test_ledger.csv";
    std::vector<CandidateMetrics> rows(3);
    rows[0] = {1e-4, 2, 0, 0.0123456789012345, 0.5, 7, 0.001, 1.5, false, "nets/a.eql"};
    rows[1] = {std::pow(10.0, -4.5), 3, 1, 0.02, std::nullopt, 12, 0.002, 2.5, false, "nets/b.eql"};
    const double inf = std::numeric_limits<double>::infinity();
    rows[2] = {1e-3, 2, 4, inf, inf, inf, inf, 0.1, true, ""};
    write_ledger(p.string(), rows);
    const auto back = read_ledger(p.string());
    REQUIRE(back.size() == 3);
    CHECK(back[0].v_int == rows[0].v_int);
    CHECK(back[1].lambda == rows[1].lambda);
    CHECK_FALSE(back[1].v_ex.has_value());
    CHECK(back[0].network_path == "nets/a.eql");
    CHECK(back[2].failed);
    CHECK(std::isinf(back[2].sparsity));
    CHECK(back[2].network_path.empty());

    std::ofstream(p) << "# eql-ledger v2\n";
    CHECK_THROWS_AS(read_ledger(p.string()), FormatError);
    std::ofstream(p) << "# eql-ledger v1\nlambda,layers,seed,v_int,v_ex,sparsity,final_loss,wall_seconds,failed,network\n"
                        "0.1,2,0,abc,,1,1,1,0,x\n";
    CHECK_THROWS_AS(read_ledger(p.string()), FormatError);
    fs::remove(p);
    CHECK_THROWS_AS(read_ledger(p.string()), IoError);
}

}  // TEST_SUITE
