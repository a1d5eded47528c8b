#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <vector>

#include "swingbench/identifier.hpp"

using namespace swingbench;

namespace {

// Hand-built trace with recognizable values: upss[k] = k, omega[k] = 1 + k/1000.
TimeSeries counting_trace(int n) {
    TimeSeries ts;
    ts.dt = 0.01;
    for (int k = 0; k < n; ++k)
        ts.push(k * 0.01, 0, 1.0 + k * 1e-3, 0, 0, 0, 0, static_cast<double>(k));
    return ts;
}

// Linear synthetic dataset: target = 0.1 u(k) + 0.9 dw(k) in scaled units.
IdDataset linear_dataset(const IdentifierConfig& cfg, int n, std::uint64_t seed) {
    IdDataset data;
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        std::vector<double> row(cfg.n_u + cfg.n_w);
        for (double& v : row) v = rng.uniform(-1.0, 1.0);
        data.targets.push_back(0.1 * row[0] + 0.9 * row[cfg.n_u]);
        data.inputs.push_back(std::move(row));
    }
    return data;
}

} // namespace

TEST_CASE("identifier_layers builds taps -> hidden -> 1") {
    IdentifierConfig cfg;
    cfg.n_u = 3;
    cfg.n_w = 3;
    cfg.hidden = {16};
    const auto layers = identifier_layers(cfg);
    REQUIRE(layers.size() == 2);
    CHECK(layers[0].fan_in == 6);
    CHECK(layers[0].fan_out == 16);
    CHECK(layers[0].activation == Activation::Tanh);
    CHECK(layers[1].fan_out == 1);
    CHECK(layers[1].activation == Activation::Linear);
}

TEST_CASE("build_dataset lays out taps newest-first with the next-step target") {
    IdentifierConfig cfg;
    cfg.n_u = 2;
    cfg.n_w = 3;
    cfg.scale_w = 100.0;
    const IdDataset data = build_dataset(counting_trace(6), cfg);
    // first usable k is max(n_u, n_w) - 1 = 2; rows for k = 2, 3, 4
    REQUIRE(data.size() == 3);
    const std::vector<double> expected_k2 = {2, 1, 0.2, 0.1, 0.0};
    REQUIRE(data.inputs[0].size() == 5);
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(data.inputs[0][i] == Catch::Approx(expected_k2[i]).margin(1e-12));
    CHECK(data.targets[0] == Catch::Approx(0.3).margin(1e-12)); // dw(3) * 100
    CHECK(data.inputs[2][0] == 4.0);
    CHECK(data.targets[2] == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("build_dataset drops samples touching excluded windows") {
    IdentifierConfig cfg;
    cfg.n_u = 2;
    cfg.n_w = 2;
    const TimeSeries run = counting_trace(30);
    const IdDataset all = build_dataset(run, cfg);
    const IdDataset cut = build_dataset(run, cfg, {{0.10, 0.12}});
    CHECK(cut.size() < all.size());
    // no surviving row may have its tap window or target inside [0.10, 0.12]:
    // those rows carry u taps 10..12 (u equals the sample index here)
    for (const auto& row : cut.inputs) {
        CHECK((row[0] < 9.5 || row[0] > 13.5));
    }
    CHECK_THROWS(build_dataset(counting_trace(2), cfg)); // too short
}

TEST_CASE("training recovers a linear map almost exactly") {
    IdentifierConfig cfg;
    cfg.hidden = {}; // degenerates to one linear layer
    cfg.eta = 0.2;
    cfg.eta_decay = 0.0;
    cfg.epochs = 200;
    const IdDataset data = linear_dataset(cfg, 400, 5);
    const TrainedIdentifier trained = train_identifier(data, cfg);
    CHECK(trained.report.final_rmse < 1e-6);
    CHECK(trained.net.weights[0][0] == Catch::Approx(0.1).margin(1e-5));
    CHECK(trained.net.weights[0][cfg.n_u] == Catch::Approx(0.9).margin(1e-5));
    // cost decreases over training
    CHECK(trained.report.epoch_cost.back() < trained.report.epoch_cost.front());
}

TEST_CASE("training is deterministic in (dataset, cfg, seed)") {
    IdentifierConfig cfg;
    cfg.hidden = {8};
    cfg.epochs = 20;
    const IdDataset data = linear_dataset(cfg, 200, 9);
    const TrainedIdentifier a = train_identifier(data, cfg);
    const TrainedIdentifier b = train_identifier(data, cfg);
    CHECK(a.net.weights == b.net.weights);
    CHECK(a.net.biases == b.net.biases);
    CHECK(a.report.epoch_cost == b.report.epoch_cost);
}

TEST_CASE("divergence guard throws instead of returning garbage") {
    IdentifierConfig cfg;
    cfg.hidden = {};
    cfg.eta = 50.0; // way past the stable step for this least-squares problem
    cfg.eta_decay = 0.0;
    cfg.clip = 0.0; // disable clipping so the divergence is visible
    cfg.epochs = 200;
    const IdDataset data = linear_dataset(cfg, 100, 11);
    CHECK_THROWS(train_identifier(data, cfg));
}

TEST_CASE("zero epochs returns the untouched initialization") {
    IdentifierConfig cfg;
    cfg.epochs = 0;
    const IdDataset data = linear_dataset(cfg, 50, 13);
    const TrainedIdentifier trained = train_identifier(data, cfg);
    const Mlp fresh = mlp_init(identifier_layers(cfg), cfg.seed);
    CHECK(trained.net.weights == fresh.weights);
    CHECK(trained.net.biases == fresh.biases);
}

TEST_CASE("predict_one_step rescales the network output into p.u.") {
    IdentifierConfig cfg;
    cfg.n_u = 1;
    cfg.n_w = 1;
    cfg.hidden = {};
    cfg.scale_w = 100.0;
    Mlp ni = mlp_init(identifier_layers(cfg), 1);
    ni.weights[0] = {0.0, 0.5};
    ni.biases[0] = {0.0};
    TappedDelays taps(1, 1);
    taps.push(0.0, 2.0); // scaled dw = 2 -> prediction 1 + 1/100
    CHECK(predict_one_step(ni, taps, cfg) == Catch::Approx(1.01).margin(1e-15));
}

TEST_CASE("dataset CSV round-trips") {
    IdentifierConfig cfg;
    const IdDataset data = linear_dataset(cfg, 25, 17);
    const std::string path = "test_id_dataset.csv";
    write_dataset_csv(data, cfg, path);
    const IdDataset back = read_dataset_csv(path, cfg);
    REQUIRE(back.size() == data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        CHECK(back.inputs[i] == data.inputs[i]);
        CHECK(back.targets[i] == data.targets[i]);
    }
    std::remove(path.c_str());
}
