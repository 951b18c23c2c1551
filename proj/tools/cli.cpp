#include "cli.hpp"

#include "gdspin/bench.hpp"
#include "gdspin/instances.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#ifndef GDSPIN_DEFAULT_METADATA
#define GDSPIN_DEFAULT_METADATA ""
#endif

namespace gdspin::cli {

namespace {

namespace fs = std::filesystem;

/// Input or instance failure, mapped to exit code 2.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverFlags {
    SolverConfig config;
    double penalty = 1.5;
};

void add_solver_flags(CLI::App* app, SolverFlags& f)
{
    auto& gd = f.config.gd;
    app->add_option("--rho-th", gd.rho_th, "GD target density")->capture_default_str();
    app->add_option("--gamma-c", gd.gamma_c, "GD particle loss rate")->capture_default_str();
    app->add_option("--eps", gd.eps, "GD gain feedback speed")->capture_default_str();
    app->add_option("--eps-hat", gd.eps_hat, "GD-mod coupling feedback speed")->capture_default_str();
    app->add_option("--noise", gd.noise, "GD noise diffusion coefficient D")->capture_default_str();
    app->add_option("--dt", gd.dt, "GD RK4 time step")->capture_default_str();
    app->add_option("--t-max", gd.t_max, "GD integration horizon")->capture_default_str();
    app->add_option("--window", gd.window, "GD stationarity window (time units)")->capture_default_str();
    app->add_option("--delta-rho", gd.delta_rho, "GD relative density tolerance")->capture_default_str();
    app->add_option("--delta-theta", gd.delta_theta, "GD phase velocity tolerance")->capture_default_str();
    app->add_option("--polish", gd.polish, "refine continuous GD readouts with L-BFGS (true/false)")
        ->capture_default_str();
    app->add_option("--bh-hops", f.config.bh.n_hops, "basin-hopping hops per run")->capture_default_str();
    app->add_option("--bh-step", f.config.bh.step_size, "basin-hopping perturbation half-width")
        ->capture_default_str();
    app->add_option("--bh-temperature", f.config.bh.temperature, "basin-hopping Metropolis temperature")
        ->capture_default_str();
    app->add_option("--mc-starts", f.config.mc_starts, "L-BFGS descents per MC run")->capture_default_str();
    app->add_option("--penalty", f.penalty,
                    "Ising/Potts field amplitude as a multiple of max_i sum_j |J_ij|")
        ->capture_default_str();
}

void finalize_solver_flags(SolverFlags& f)
{
    f.config.ising_penalty = f.penalty;
    try {
        f.config.gd.validate();
        f.config.bh.validate();
        f.config.lbfgs.validate();
    }
    catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    if (f.config.mc_starts < 1) {
        throw InputError("--mc-starts must be >= 1");
    }
}

Instance resolve_input(const std::string& input)
{
    try {
        if (auto spec = parse_ensemble_spec(input)) {
            Instance inst;
            inst.name = ensemble_name(*spec);
            inst.J = generate(*spec);
            return inst;
        }
        if (!fs::exists(input)) {
            throw InputError("input '" + input + "' is neither a file nor an ensemble spec");
        }
        return load_instance(input);
    }
    catch (const InputError&) {
        throw;
    }
    catch (const std::exception& e) {
        throw InputError(e.what());
    }
}

std::string phases_summary(const SpinConfiguration& conf, std::size_t limit = 12)
{
    std::ostringstream os;
    os << std::fixed;
    if (conf.tag().kind == ModelTag::Kind::ising) {
        const auto s = conf.ising_spins();
        for (std::size_t i = 0; i < s.size() && i < 3 * limit; ++i) {
            os << (s[i] > 0 ? '+' : '-');
        }
        if (s.size() > 3 * limit) {
            os << "...";
        }
        return os.str();
    }
    os << std::setprecision(4);
    for (std::size_t i = 0; i < conf.size() && i < limit; ++i) {
        os << (i ? " " : "") << conf[i];
    }
    if (conf.size() > limit) {
        os << " ...";
    }
    return os.str();
}

void write_text_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write " + path.string());
    }
    out << text;
}

// ---------------------------------------------------------------------------
// solve

struct SolveFlags {
    std::string input;
    std::string model = "xy";
    std::string algo = "gd";
    std::uint64_t seed = 0;
    int runs = 1;
    double time_budget = 0.0;
    std::string out;
    unsigned jobs = 1;
    SolverFlags solver;
};

int cmd_solve(SolveFlags& f, std::ostream& out, std::ostream& err)
{
    finalize_solver_flags(f.solver);
    ModelTag model;
    Algorithm algo;
    try {
        model = parse_model_tag(f.model);
        algo = parse_algorithm(f.algo);
    }
    catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    if (f.runs < 1) {
        throw InputError("--runs must be >= 1");
    }
    if (f.time_budget < 0.0) {
        throw InputError("--time-budget must be non-negative");
    }
    const Instance inst = resolve_input(f.input);
    const FieldSpec fields = fields_for_model(inst.J, model, f.solver.penalty);
    if (model.kind == ModelTag::Kind::ising) {
        for (const auto& w : fields.validate_ising(inst.J)) {
            err << "warning: " << w << '\n';
        }
    }

    std::vector<RunRecord> records(static_cast<std::size_t>(f.runs));
    parallel_for(records.size(), f.jobs, [&](std::size_t r) {
        records[r] = solve_once(algo, inst.J, fields, f.solver.config, derive_seed(f.seed, r), f.time_budget);
        records[r].instance = inst.name;
    });
    std::size_t best = 0;
    int converged = 0;
    for (std::size_t r = 0; r < records.size(); ++r) {
        if (records[r].best_energy < records[best].best_energy) {
            best = r;
        }
        converged += records[r].converged ? 1 : 0;
    }
    const RunRecord& b = records[best];

    out << std::setprecision(12);
    out << "instance:      " << inst.name << " (n = " << inst.J.size() << ", "
        << (inst.J.is_sparse() ? "sparse" : "dense") << ")\n";
    out << "model:         " << model.name() << '\n';
    out << "algorithm:     " << algorithm_name(algo) << '\n';
    out << "runs:          " << f.runs << " (seed " << f.seed << ")\n";
    out << "best energy:   " << b.best_energy << '\n';
    if (model.kind == ModelTag::Kind::ising) {
        const auto spins = b.best_conf.ising_spins();
        out << "ising energy:  " << ising_energy(inst.J, spins) << '\n';
    }
    out << "converged:     " << converged << '/' << f.runs << (b.converged ? " (best run converged)" : " (best run not converged)") << '\n';
    out << "iterations:    " << b.iterations << '\n';
    out << "configuration: " << phases_summary(b.best_conf) << '\n';
    std::optional<double> cut;
    if (inst.graph && model.kind == ModelTag::Kind::ising) {
        cut = maxcut_value(*inst.graph, b.best_conf);
        out << "cut value:     " << *cut << '\n';
    }
    if (algo == Algorithm::gd || algo == Algorithm::gd_mod) {
        out << "projected hardware time: " << project_hw_time(b) << " s (" << b.feedback_updates
            << " feedback updates at 0.1 ms)\n";
    }

    if (!f.out.empty()) {
        nlohmann::json doc;
        doc["instance"] = inst.name;
        doc["n"] = inst.J.size();
        doc["model"] = model.name();
        doc["algorithm"] = algorithm_name(algo);
        doc["seed"] = f.seed;
        doc["runs"] = f.runs;
        doc["best_energy"] = b.best_energy;
        doc["best_run_seed"] = b.seed;
        doc["converged_runs"] = converged;
        doc["iterations"] = b.iterations;
        doc["feedback_updates"] = b.feedback_updates;
        doc["theta"] = b.best_conf.theta();
        if (model.kind == ModelTag::Kind::ising) {
            doc["spins"] = b.best_conf.ising_spins();
        }
        if (cut) {
            doc["cut"] = *cut;
        }
        std::vector<double> energies;
        for (const auto& r : records) {
            energies.push_back(r.best_energy);
        }
        doc["energies"] = energies;
        write_text_file(f.out, doc.dump(2) + "\n");
    }
    return kSuccess;
}

// ---------------------------------------------------------------------------
// gen / convert

struct GenFlags {
    std::string kind = "dense";
    std::size_t n = 0;
    std::uint64_t seed = 0;
    double bound = 10.0;
    std::string weight_rule = "endpoints";
    std::string format;
    std::string out;
};

std::string format_for(const std::string& requested, const std::string& path)
{
    if (!requested.empty()) {
        return requested;
    }
    return fs::path(path).extension() == ".json" ? "json" : "gset";
}

void write_instance(const CouplingMatrix& J, const std::string& format, const std::string& path)
{
    std::ostringstream os;
    if (format == "json") {
        os << matrix_to_json(J);
    }
    else {
        write_gset(os, graph_from_couplings(J));
    }
    write_text_file(path, os.str());
}

int cmd_gen(const GenFlags& f, std::ostream& out)
{
    EnsembleSpec spec;
    if (f.kind == "dense") {
        spec.kind = EnsembleKind::dense;
    }
    else if (f.kind == "sparse3") {
        spec.kind = EnsembleKind::sparse3;
    }
    else {
        throw InputError("--kind must be dense or sparse3");
    }
    spec.n = f.n;
    spec.seed = f.seed;
    spec.bound = f.bound;
    if (f.weight_rule == "endpoints") {
        spec.weight_rule = SparseWeightRule::random_endpoints;
    }
    else if (f.weight_rule == "gap") {
        spec.weight_rule = SparseWeightRule::excluded_gap;
    }
    else {
        throw InputError("--weight-rule must be endpoints or gap");
    }
    CouplingMatrix J;
    try {
        J = generate(spec);
    }
    catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    const std::string format = format_for(f.format, f.out);
    write_instance(J, format, f.out);
    out << "wrote " << ensemble_name(spec) << " (" << J.upper_triplets().size() << " couplings) to "
        << f.out << " as " << format << '\n';
    return kSuccess;
}

struct ConvertFlags {
    std::string input;
    std::string format;
    std::string out;
};

int cmd_convert(const ConvertFlags& f, std::ostream& out)
{
    const Instance inst = resolve_input(f.input);
    const std::string format = format_for(f.format, f.out);
    write_instance(inst.J, format, f.out);
    out << "wrote " << inst.name << " to " << f.out << " as " << format << '\n';
    return kSuccess;
}

// ---------------------------------------------------------------------------
// bench

struct BenchFlags {
    std::string experiment;
    std::vector<std::string> algos{"gd", "mc", "bh"};
    std::string ensemble = "dense";
    std::size_t n = 20;
    int instances = 20;
    double bound = 10.0;
    std::vector<std::string> files;
    std::string model = "xy";
    int runs = 0;
    std::uint64_t seed = 0;
    unsigned jobs = 0;
    std::string out_dir = ".";
    std::string data;
    std::vector<std::string> graphs{"G1", "G2", "G3", "G4", "G5"};
    std::string metadata;
    double time_budget = -1.0;
    std::vector<std::size_t> sizes{100, 200, 400, 800};
    int repeats = 3;
    bool synthetic = false;
    SolverFlags solver;
};

std::vector<Algorithm> parse_algos(const std::vector<std::string>& names)
{
    std::vector<Algorithm> out;
    try {
        for (const auto& a : names) {
            out.push_back(parse_algorithm(a));
        }
    }
    catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    if (out.empty()) {
        throw InputError("--algos needs at least one algorithm");
    }
    return out;
}

fs::path prepare_out_dir(const std::string& dir)
{
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) {
        throw InputError("cannot create output directory " + dir + ": " + ec.message());
    }
    return p;
}

int bench_success(BenchFlags& f, std::ostream& out)
{
    ExperimentSpec spec;
    spec.algorithms = parse_algos(f.algos);
    try {
        spec.model = parse_model_tag(f.model);
    }
    catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    if (f.files.empty()) {
        if (f.instances < 1) {
            throw InputError("--instances must be >= 1");
        }
        for (int k = 0; k < f.instances; ++k) {
            EnsembleSpec es;
            if (f.ensemble == "dense") {
                es.kind = EnsembleKind::dense;
            }
            else if (f.ensemble == "sparse3") {
                es.kind = EnsembleKind::sparse3;
            }
            else {
                throw InputError("--ensemble must be dense or sparse3");
            }
            es.n = f.n;
            es.bound = f.bound;
            es.seed = derive_seed(f.seed, static_cast<std::uint64_t>(k));
            try {
                es.validate();
            }
            catch (const std::invalid_argument& e) {
                throw InputError(e.what());
            }
            spec.ensembles.push_back(es);
        }
    }
    for (const auto& file : f.files) {
        spec.files.emplace_back(file);
    }
    spec.runs_per_instance = f.runs > 0 ? f.runs : 100;
    spec.time_budget = std::max(0.0, f.time_budget);
    spec.solver = f.solver.config;
    spec.seed = f.seed;
    spec.jobs = f.jobs;
    const fs::path dir = prepare_out_dir(f.out_dir);
    spec.archive = dir / "runs.ndjson";

    const ExperimentResult result = run_experiment(spec);
    {
        std::ostringstream csv;
        write_success_csv(csv, result);
        write_text_file(dir / "success.csv", csv.str());
    }
    {
        std::ostringstream csv;
        write_histogram_csv(csv, result);
        write_text_file(dir / "success_hist.csv", csv.str());
    }
    for (const auto& io : result.instances) {
        if (!io.error.empty()) {
            out << "instance " << io.name << " failed: " << io.error << '\n';
        }
    }
    out << "method  mean_success  histogram(0.0..1.0)\n";
    for (const auto& s : result.stats) {
        out << std::left << std::setw(8) << s.method << std::setw(14) << std::setprecision(4) << s.mean;
        for (int c : s.histogram) {
            out << ' ' << c;
        }
        out << '\n';
    }
    out << "wrote " << (dir / "success.csv").string() << ", " << (dir / "success_hist.csv").string()
        << ", " << (dir / "runs.ndjson").string() << '\n';
    return kSuccess;
}

std::optional<fs::path> find_graph_file(const fs::path& data, const std::string& name)
{
    for (const char* ext : {"", ".txt", ".gset", ".mc"}) {
        fs::path p = data / (name + ext);
        if (fs::is_regular_file(p)) {
            return p;
        }
    }
    return std::nullopt;
}

int bench_maxcut(BenchFlags& f, std::ostream& out)
{
    std::vector<std::pair<std::string, WeightedGraph>> graphs;
    fs::path data;
    if (f.files.empty()) {
        std::string dir = f.data;
        if (dir.empty()) {
            if (const char* env = std::getenv("GDSPIN_DATA")) {
                dir = env;
            }
        }
        if (dir.empty()) {
            throw InputError("no G-Set data location: pass --data DIR, set GDSPIN_DATA, or list --files");
        }
        data = dir;
        if (!fs::is_directory(data)) {
            throw InputError("G-Set data directory " + dir + " does not exist");
        }
        for (const auto& name : f.graphs) {
            const auto path = find_graph_file(data, name);
            if (!path) {
                throw InputError("graph " + name + " not found under " + dir);
            }
            graphs.emplace_back(name, read_gset_file(*path));
        }
    }
    else {
        for (const auto& file : f.files) {
            try {
                graphs.emplace_back(fs::path(file).stem().string(), read_gset_file(file));
            }
            catch (const std::exception& e) {
                throw InputError(file + ": " + e.what());
            }
        }
    }

    std::string meta_path = f.metadata;
    if (meta_path.empty() && !data.empty() && fs::exists(data / "best_known.txt")) {
        meta_path = (data / "best_known.txt").string();
    }
    if (meta_path.empty()) {
        meta_path = GDSPIN_DEFAULT_METADATA;
    }
    MaxCutSuiteSpec spec;
    spec.algorithm = parse_algos(f.algos).front();
    spec.runs_per_instance = f.runs > 0 ? f.runs : 20;
    spec.time_budget = f.time_budget >= 0.0 ? f.time_budget : 60.0;
    spec.solver = f.solver.config;
    spec.seed = f.seed;
    spec.jobs = f.jobs;
    try {
        spec.metadata = meta_path.empty() ? std::map<std::string, double>{} : load_metadata(meta_path);
    }
    catch (const std::exception& e) {
        throw InputError(meta_path + ": " + e.what());
    }

    const fs::path dir = prepare_out_dir(f.out_dir);
    std::vector<RunRecord> records;
    const auto stats = run_maxcut_suite(graphs, spec, &records);
    {
        std::ostringstream csv;
        write_maxcut_csv(csv, stats);
        write_text_file(dir / "maxcut.csv", csv.str());
    }
    {
        std::ostringstream nd;
        write_archive(nd, records);
        write_text_file(dir / "runs.ndjson", nd.str());
    }
    out << "instance  n     best_cut  mean_cut  best_known  deviation_%\n";
    for (const auto& s : stats) {
        out << std::left << std::setw(10) << s.name << std::setw(6) << s.n << std::setw(10) << s.best_cut
            << std::setw(10) << s.mean_cut;
        if (s.best_known) {
            out << std::setw(12) << *s.best_known << std::setprecision(4) << *s.best_deviation_pct;
        }
        else {
            out << std::setw(12) << "-" << "-";
        }
        out << std::setprecision(12) << '\n';
    }
    out << "wrote " << (dir / "maxcut.csv").string() << '\n';
    return kSuccess;
}

int bench_scaling(BenchFlags& f, std::ostream& out)
{
    if (f.sizes.size() < 2) {
        throw InputError("--sizes needs at least two values");
    }
    if (f.repeats < 1) {
        throw InputError("--repeats must be >= 1");
    }
    const Algorithm algo = parse_algos(f.algos).front();
    std::vector<double> updates;
    RunTimer timer;
    std::string label;
    if (f.synthetic) {
        label = "synthetic";
        timer = [](std::size_t n, int) { return static_cast<double>(n) * static_cast<double>(n); };
    }
    else {
        label = algorithm_name(algo);
        const SolverConfig config = f.solver.config;
        const std::uint64_t seed = f.seed;
        timer = [&updates, algo, config, seed](std::size_t n, int rep) {
            EnsembleSpec es;
            es.n = n;
            es.seed = derive_seed(seed, n, static_cast<std::uint64_t>(rep));
            const CouplingMatrix J = gen_dense(es);
            const RunRecord rec = solve_once(algo, J, FieldSpec{}, config,
                                             derive_seed(seed, n, static_cast<std::uint64_t>(rep), 1));
            updates.push_back(static_cast<double>(rec.feedback_updates));
            return rec.wall_time;
        };
    }
    std::vector<std::size_t> sizes = f.sizes;
    if (!std::is_sorted(sizes.begin(), sizes.end())
        || std::adjacent_find(sizes.begin(), sizes.end()) != sizes.end()) {
        throw InputError("--sizes must be strictly increasing");
    }
    const ScalingFit fit = scaling_study(sizes, f.repeats, timer, label);
    const fs::path dir = prepare_out_dir(f.out_dir);
    std::ostringstream csv;
    write_scaling_csv(csv, fit);
    write_text_file(dir / "scaling.csv", csv.str());

    out << std::setprecision(6);
    out << "n       time_s\n";
    for (std::size_t k = 0; k < fit.sizes.size(); ++k) {
        out << std::left << std::setw(8) << fit.sizes[k] << fit.times[k];
        if (!updates.empty() && (algo == Algorithm::gd || algo == Algorithm::gd_mod)) {
            double mean = 0.0;
            for (int r = 0; r < f.repeats; ++r) {
                mean += updates[k * static_cast<std::size_t>(f.repeats) + static_cast<std::size_t>(r)];
            }
            mean /= f.repeats;
            out << "   projected hardware " << mean * 1e-4 << " s";
        }
        out << '\n';
    }
    out << "fit: log T = " << fit.slope << " log N + " << fit.intercept << " (r^2 = " << fit.r_squared
        << ")\n";
    out << "wrote " << (dir / "scaling.csv").string() << '\n';
    return kSuccess;
}

int cmd_bench(BenchFlags& f, std::ostream& out)
{
    finalize_solver_flags(f.solver);
    if (f.experiment == "success") {
        return bench_success(f, out);
    }
    if (f.experiment == "maxcut") {
        return bench_maxcut(f, out);
    }
    return bench_scaling(f, out);
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Gain-dissipative solvers for XY, Ising and Potts spin Hamiltonians", "gdspin"};
    app.set_config("--config", "", "key = value file with default flag values");
    app.allow_config_extras(false);
    app.require_subcommand(1);

    SolveFlags solve;
    auto* s = app.add_subcommand("solve", "Minimise one instance with GD, GD-mod, MC or BH");
    s->add_option("--input", solve.input, "instance file (.json matrix or G-Set graph) or dense:N[:SEED[:BOUND]] / sparse3:N[:SEED]")
        ->required();
    s->add_option("--model", solve.model, "xy, ising or potts:<q>")->capture_default_str();
    s->add_option("--algo", solve.algo, "gd, gd-mod, mc or bh")->capture_default_str();
    s->add_option("--seed", solve.seed, "base random seed")->capture_default_str();
    s->add_option("--runs", solve.runs, "independent runs; the best is reported")->capture_default_str();
    s->add_option("--time-budget", solve.time_budget, "seconds per GD run, 0 for none")->capture_default_str();
    s->add_option("--out", solve.out, "write a JSON report to FILE");
    s->add_option("--jobs", solve.jobs, "worker threads, 0 for all cores")->capture_default_str();
    add_solver_flags(s, solve.solver);

    GenFlags gen;
    auto* g = app.add_subcommand("gen", "Generate a random coupling instance");
    g->add_option("--kind", gen.kind, "dense or sparse3")->capture_default_str();
    g->add_option("--n", gen.n, "number of spins")->required();
    g->add_option("--seed", gen.seed, "random seed")->capture_default_str();
    g->add_option("--bound", gen.bound, "coupling magnitude bound")->capture_default_str();
    g->add_option("--weight-rule", gen.weight_rule, "sparse3 weights: endpoints or gap")->capture_default_str();
    g->add_option("--format", gen.format, "json or gset (default from the --out extension)")
        ->check(CLI::IsMember({"json", "gset"}));
    g->add_option("--out", gen.out, "output file")->required();

    ConvertFlags conv;
    auto* c = app.add_subcommand("convert", "Convert an instance between JSON and G-Set formats");
    c->add_option("--input", conv.input, "instance file or ensemble spec")->required();
    c->add_option("--format", conv.format, "json or gset (default from the --out extension)")
        ->check(CLI::IsMember({"json", "gset"}));
    c->add_option("--out", conv.out, "output file")->required();

    BenchFlags bench;
    auto* b = app.add_subcommand("bench", "Run success-probability, Max-Cut or scaling experiments");
    b->add_option("--experiment", bench.experiment, "success, maxcut or scaling")
        ->required()
        ->check(CLI::IsMember({"success", "maxcut", "scaling"}));
    b->add_option("--algos", bench.algos, "algorithms to run (first one for maxcut/scaling)")
        ->delimiter(',')
        ->capture_default_str();
    b->add_option("--ensemble", bench.ensemble, "success: dense or sparse3")->capture_default_str();
    b->add_option("--n", bench.n, "success: spins per instance")->capture_default_str();
    b->add_option("--instances", bench.instances, "success: number of random instances")->capture_default_str();
    b->add_option("--bound", bench.bound, "success: coupling magnitude bound")->capture_default_str();
    b->add_option("--files", bench.files, "instance files instead of a random ensemble")->delimiter(',');
    b->add_option("--model", bench.model, "success: xy, ising or potts:<q>")->capture_default_str();
    b->add_option("--runs", bench.runs, "runs per instance (default 100 for success, 20 for maxcut)");
    b->add_option("--seed", bench.seed, "base random seed")->capture_default_str();
    b->add_option("--jobs", bench.jobs, "worker threads, 0 for all cores")->capture_default_str();
    b->add_option("--out-dir", bench.out_dir, "directory for CSV and NDJSON artifacts")->capture_default_str();
    b->add_option("--data", bench.data, "maxcut: G-Set directory (default $GDSPIN_DATA)");
    b->add_option("--graphs", bench.graphs, "maxcut: graph names under the data directory")
        ->delimiter(',')
        ->capture_default_str();
    b->add_option("--metadata", bench.metadata, "maxcut: best-known cut values file");
    b->add_option("--time-budget", bench.time_budget, "seconds per GD run (maxcut default 60)");
    b->add_option("--sizes", bench.sizes, "scaling: problem sizes")->delimiter(',')->capture_default_str();
    b->add_option("--repeats", bench.repeats, "scaling: runs averaged per size")->capture_default_str();
    b->add_flag("--synthetic", bench.synthetic, "scaling: use a T = N^2 timer stub instead of solving");
    add_solver_flags(b, bench.solver);

    std::vector<const char*> argv;
    argv.push_back("gdspin");
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    }
    catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    }
    catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    }
    catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsageError;
    }

    try {
        if (s->parsed()) {
            return cmd_solve(solve, out, err);
        }
        if (g->parsed()) {
            return cmd_gen(gen, out);
        }
        if (c->parsed()) {
            return cmd_convert(conv, out);
        }
        return cmd_bench(bench, out);
    }
    catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }
    catch (const NumericalAbort& e) {
        err << "numerical abort: " << e.what() << '\n';
        return kNumericalAbort;
    }
    catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }
}

} // namespace gdspin::cli
