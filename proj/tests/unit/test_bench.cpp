#include "gdspin/bench.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace gdspin;

TEST_CASE("algorithm names")
{
    CHECK(parse_algorithm("gd") == Algorithm::gd);
    CHECK(parse_algorithm("gd-mod") == Algorithm::gd_mod);
    CHECK(parse_algorithm("gd_mod") == Algorithm::gd_mod);
    CHECK(parse_algorithm("bh") == Algorithm::bh);
    CHECK(algorithm_name(Algorithm::mc) == "mc");
    CHECK_THROWS(parse_algorithm("sa"));
}

TEST_CASE("success probability and histogram")
{
    const double ref = -100.0;
    const std::vector<double> e{-100.0, -100.0 + 5e-8, -100.0 + 2e-7, -99.0};
    CHECK(success_probability(e, ref, 1e-9) == doctest::Approx(0.5));
    CHECK(success_probability({}, ref, 1e-9) == 0.0);

    const auto h = probability_histogram({0.0, 0.05, 0.1, 0.55, 0.95, 1.0});
    REQUIRE(h.size() == 10);
    CHECK(h[0] == 2);
    CHECK(h[1] == 1);
    CHECK(h[5] == 1);
    CHECK(h[9] == 2);
}

TEST_CASE("log-log fit")
{
    std::vector<double> n{100, 200, 400, 800};
    std::vector<double> t;
    for (double x : n) {
        t.push_back(x * x);
    }
    const auto fit = fit_loglog(n, t, "quad");
    CHECK(std::abs(fit.slope - 2.0) < 1e-6);
    CHECK(std::abs(fit.intercept) < 1e-6);
    CHECK(fit.r_squared == doctest::Approx(1.0));
    for (double r : fit.residuals) {
        CHECK(std::abs(r) < 1e-9);
    }

    std::vector<double> t2;
    for (double x : n) {
        t2.push_back(3e-7 * std::pow(x, 2.29));
    }
    const auto fit2 = fit_loglog(n, t2);
    CHECK(fit2.slope == doctest::Approx(2.29).epsilon(1e-9));
    CHECK(fit2.intercept == doctest::Approx(std::log(3e-7)).epsilon(1e-9));

    CHECK_THROWS(fit_loglog({100, 100}, {1, 2}));
    CHECK_THROWS(fit_loglog({100, 200}, {1, 0}));
    CHECK_THROWS(fit_loglog({100}, {1}));

    const auto study = scaling_study({10, 20, 40}, 2, [](std::size_t m, int) { return double(m * m * m); });
    CHECK(study.slope == doctest::Approx(3.0));
    std::ostringstream csv;
    write_scaling_csv(csv, study);
    CHECK(csv.str().rfind("label,n,time_s,", 0) == 0);
}

TEST_CASE("hardware projection")
{
    RunRecord r;
    r.feedback_updates = 123456;
    CHECK(project_hw_time(r) == 123456 * 1e-4);
    CHECK(project_hw_time(r, 1e-6) == 123456 * 1e-6);
}

TEST_CASE("seed derivation")
{
    std::set<std::uint64_t> seen;
    for (std::uint64_t a = 0; a < 30; ++a) {
        for (std::uint64_t b = 0; b < 30; ++b) {
            seen.insert(derive_seed(7, a, b));
        }
    }
    CHECK(seen.size() == 900);
    CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
    CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}

TEST_CASE("parallel for")
{
    std::vector<int> hit(100, 0);
    parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i] += 1; });
    for (int h : hit) {
        CHECK(h == 1);
    }
    CHECK_THROWS_AS(parallel_for(10, 3,
                                 [](std::size_t i) {
                                     if (i == 5) {
                                         throw std::runtime_error("boom");
                                     }
                                 }),
                    std::runtime_error);
}

TEST_CASE("run record archive")
{
    RunRecord r;
    r.method = "gd";
    r.instance = "dense:5:1";
    r.seed = 0xfedcba9876543210ULL;
    r.best_energy = -123.456789012345678;
    r.best_conf = SpinConfiguration({0.1, 2.0 / 3.0, 6.2}, ModelTag::xy());
    r.iterations = 42;
    r.feedback_updates = 42;
    r.wall_time = 0.25;
    r.converged = true;
    r.trajectory.push_back({1.0, {0.5, 0.25, 0.125}, {0.1, 0.2, 0.3}, {1.0, 1.5, 2.0}});
    RunRecord s = r;
    s.method = "bh";
    s.best_conf = SpinConfiguration({0.0, kPi}, ModelTag::ising());
    s.trajectory.clear();

    std::ostringstream out;
    write_archive(out, {r, s});
    std::istringstream in(out.str());
    const auto back = read_archive(in);
    REQUIRE(back.size() == 2);
    CHECK(back[0] == r);
    CHECK(back[1] == s);
    CHECK_THROWS(run_record_from_json("{\"schema\": \"other\"}"));
    CHECK_THROWS(run_record_from_json("{"));
}

TEST_CASE("solve_once on each algorithm")
{
    EnsembleSpec es;
    es.n = 8;
    es.seed = 3;
    const auto J = gen_dense(es);
    SolverConfig cfg;
    for (auto a : {Algorithm::gd, Algorithm::gd_mod, Algorithm::mc, Algorithm::bh}) {
        const auto r1 = solve_once(a, J, FieldSpec{}, cfg, 17);
        const auto r2 = solve_once(a, J, FieldSpec{}, cfg, 17);
        CHECK(r1.same_outcome(r2));
        CHECK(r1.best_energy == doctest::Approx(xy_energy(J, r1.best_conf)).epsilon(1e-12));
        CHECK(r1.method == algorithm_name(a));
    }
    const auto f = fields_for_model(J, ModelTag::ising(), 1.5);
    REQUIRE(f.find(2));
    CHECK(f.find(2)->h[0] == doctest::Approx(1.5 * J.max_abs_row_sum()));
    for (auto a : {Algorithm::gd, Algorithm::mc, Algorithm::bh}) {
        const auto r = solve_once(a, J, f, cfg, 5);
        CHECK(r.best_conf.tag() == ModelTag::ising());
        CHECK(r.best_energy == doctest::Approx(generalized_energy(J, f, cfg.gd.rho_th, r.best_conf)));
    }
    const auto p = fields_for_model(J, ModelTag::potts(3), 1.5);
    CHECK(p.implied_model() == ModelTag::potts(3));
    CHECK(fields_for_model(J, ModelTag::xy(), 1.5).empty());
}

TEST_CASE("small success experiment")
{
    ExperimentSpec spec;
    spec.algorithms = {Algorithm::gd, Algorithm::mc, Algorithm::bh};
    for (std::uint64_t k = 0; k < 3; ++k) {
        EnsembleSpec es;
        es.n = 6;
        es.seed = k;
        spec.ensembles.push_back(es);
    }
    spec.files.emplace_back("/nonexistent/instance.txt");
    spec.runs_per_instance = 4;
    spec.jobs = 2;
    spec.seed = 9;
    const auto dir = std::filesystem::temp_directory_path() / "gdspin_test_bench";
    std::filesystem::create_directories(dir);
    spec.archive = dir / "runs.ndjson";

    const auto res = run_experiment(spec);
    REQUIRE(res.instances.size() == 4);
    CHECK_FALSE(res.instances[3].error.empty());
    CHECK(res.records.size() == 3 * 3 * 4);
    REQUIRE(res.stats.size() == 3);
    for (const auto& st : res.stats) {
        CHECK(st.probabilities.size() == 3);
        for (double p : st.probabilities) {
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
        }
        int total = 0;
        for (int c : st.histogram) {
            total += c;
        }
        CHECK(total == 3);
    }
    for (std::size_t k = 0; k < 3; ++k) {
        const auto& io = res.instances[k];
        for (const auto& m : io.methods) {
            CHECK(m.best_energy >= io.reference);
            CHECK(m.runs == 4);
        }
    }
    CHECK(&res.stats_for(Algorithm::bh) == &res.stats[2]);

    std::ifstream in(*spec.archive);
    const auto archived = read_archive(in);
    CHECK(archived.size() == res.records.size());

    std::ostringstream csv;
    write_success_csv(csv, res);
    CHECK(csv.str().rfind("method,instance,n,reference_energy,best_energy,success_probability,runs", 0) == 0);
    std::ostringstream hist;
    write_histogram_csv(hist, res);
    CHECK(hist.str().rfind("method,bin_low,bin_high,count", 0) == 0);

    spec.jobs = 1;
    spec.archive.reset();
    const auto again = run_experiment(spec);
    REQUIRE(again.records.size() == res.records.size());
    for (std::size_t k = 0; k < res.records.size(); ++k) {
        CHECK(again.records[k].same_outcome(res.records[k]));
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("max-cut suite on toy6")
{
    const std::filesystem::path data(GDSPIN_TEST_DATA_DIR);
    const auto g = read_gset_file(data / "toy6.gset");
    MaxCutSuiteSpec spec;
    spec.runs_per_instance = 4;
    spec.time_budget = 5.0;
    spec.metadata = load_metadata(data / "gset_best_known.txt");
    std::vector<RunRecord> records;
    const auto stats = run_maxcut_suite({{"toy6", g}}, spec, &records);
    REQUIRE(stats.size() == 1);
    CHECK(stats[0].best_cut == 6.0);
    REQUIRE(stats[0].best_known);
    CHECK(*stats[0].best_deviation_pct == 0.0);
    CHECK(records.size() == 4);
    std::ostringstream csv;
    write_maxcut_csv(csv, stats);
    CHECK(csv.str().rfind("instance,n,edges,runs,converged,best_cut,mean_cut", 0) == 0);
}
