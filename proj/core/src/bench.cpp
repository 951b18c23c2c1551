#include "gdspin/bench.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <istream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace gdspin {

namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

struct LoadedInstance {
    std::string name;
    CouplingMatrix J;
    std::optional<WeightedGraph> graph;
    double cut_offset = 0.0;
    std::string error;
};

std::vector<LoadedInstance> load_all(const ExperimentSpec& spec)
{
    std::vector<LoadedInstance> out;
    for (const auto& e : spec.ensembles) {
        LoadedInstance li;
        li.name = ensemble_name(e);
        try {
            li.J = generate(e);
        }
        catch (const std::exception& ex) {
            li.error = ex.what();
        }
        out.push_back(std::move(li));
    }
    for (const auto& f : spec.files) {
        LoadedInstance li;
        li.name = f.stem().string();
        try {
            Instance inst = load_instance(f);
            li.J = std::move(inst.J);
            li.graph = std::move(inst.graph);
            li.cut_offset = inst.cut_offset;
        }
        catch (const std::exception& ex) {
            li.error = ex.what();
        }
        out.push_back(std::move(li));
    }
    return out;
}

void write_double(std::ostream& out, double v)
{
    out << std::setprecision(17) << v;
}

} // namespace

std::string algorithm_name(Algorithm a)
{
    switch (a) {
    case Algorithm::gd:
        return "gd";
    case Algorithm::gd_mod:
        return "gd_mod";
    case Algorithm::mc:
        return "mc";
    case Algorithm::bh:
        return "bh";
    }
    return "gd";
}

Algorithm parse_algorithm(const std::string& text)
{
    if (text == "gd") {
        return Algorithm::gd;
    }
    if (text == "gd-mod" || text == "gd_mod") {
        return Algorithm::gd_mod;
    }
    if (text == "mc") {
        return Algorithm::mc;
    }
    if (text == "bh") {
        return Algorithm::bh;
    }
    throw std::invalid_argument("unknown algorithm '" + text + "' (expected gd, gd-mod, mc or bh)");
}

FieldSpec fields_for_model(const CouplingMatrix& J, ModelTag model, double penalty_factor)
{
    if (!model.is_discrete()) {
        return {};
    }
    double amplitude = penalty_factor * J.max_abs_row_sum();
    if (amplitude == 0.0) {
        amplitude = 1.0;
    }
    if (model.kind == ModelTag::Kind::ising) {
        return FieldSpec::ising(J.size(), amplitude);
    }
    return FieldSpec::potts(J.size(), model.q, amplitude);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c) noexcept
{
    std::uint64_t h = splitmix64(base);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    h = splitmix64(h ^ c);
    return h;
}

RunRecord solve_once(Algorithm algorithm, const CouplingMatrix& J, const FieldSpec& fields,
                     const SolverConfig& config, std::uint64_t seed, double time_budget)
{
    if (algorithm == Algorithm::gd || algorithm == Algorithm::gd_mod) {
        GdParams p = config.gd;
        p.seed = seed;
        if (time_budget > 0.0) {
            p.time_budget = time_budget;
        }
        const auto mode = algorithm == Algorithm::gd ? CouplingMode::dissipative : CouplingMode::gain;
        return run_gd(J, fields, mode, p);
    }

    const double rho_th = config.gd.rho_th;
    const Landscape land =
        fields.empty() ? Landscape::xy(J) : Landscape::generalized(J, fields, rho_th);
    RunRecord rec;
    if (algorithm == Algorithm::mc) {
        rec = mc_multistart(land, config.mc_starts, config.lbfgs, seed);
    }
    else {
        BasinHoppingParams bh = config.bh;
        bh.seed = seed;
        const SpinConfiguration start = random_configuration(J.size(), derive_seed(seed, 1));
        rec = basin_hopping(land, start, bh, config.lbfgs).record;
    }
    const ModelTag model = fields.implied_model();
    if (model.is_discrete()) {
        rec.best_conf = discretize(rec.best_conf, model);
        rec.best_energy = generalized_energy(J, fields, rho_th, rec.best_conf);
    }
    return rec;
}

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn)
{
    if (jobs == 0) {
        jobs = std::max(1u, std::thread::hardware_concurrency());
    }
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(count, 1)));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (unsigned w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) {
                    return;
                }
                try {
                    fn(i);
                }
                catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                    next.store(count);
                }
            }
        });
    }
    for (auto& t : workers) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

void ExperimentSpec::validate() const
{
    if (runs_per_instance < 1) {
        throw std::invalid_argument("runs_per_instance must be >= 1");
    }
    if (algorithms.empty()) {
        throw std::invalid_argument("experiment needs at least one algorithm");
    }
    if (!(success_rtol >= 0.0)) {
        throw std::invalid_argument("success tolerance must be non-negative");
    }
    if (time_budget < 0.0) {
        throw std::invalid_argument("time budget must be non-negative");
    }
}

const SuccessStats& ExperimentResult::stats_for(Algorithm a) const
{
    const std::string name = algorithm_name(a);
    for (const auto& s : stats) {
        if (s.method == name) {
            return s;
        }
    }
    throw std::out_of_range("no statistics for method " + name);
}

double success_probability(const std::vector<double>& energies, double reference, double rtol)
{
    if (energies.empty()) {
        return 0.0;
    }
    const double tol = rtol * std::abs(reference);
    const auto hits = std::count_if(energies.begin(), energies.end(),
                                    [&](double e) { return std::abs(e - reference) <= tol; });
    return static_cast<double>(hits) / static_cast<double>(energies.size());
}

std::vector<int> probability_histogram(const std::vector<double>& probabilities)
{
    std::vector<int> bins(10, 0);
    for (double p : probabilities) {
        const int b = std::clamp(static_cast<int>(std::floor(p * 10.0)), 0, 9);
        ++bins[static_cast<std::size_t>(b)];
    }
    return bins;
}

ExperimentResult run_experiment(const ExperimentSpec& spec)
{
    spec.validate();
    const auto instances = load_all(spec);
    const std::size_t n_alg = spec.algorithms.size();
    const auto runs = static_cast<std::size_t>(spec.runs_per_instance);

    std::vector<FieldSpec> fields(instances.size());
    for (std::size_t k = 0; k < instances.size(); ++k) {
        if (instances[k].error.empty()) {
            fields[k] = fields_for_model(instances[k].J, spec.model, spec.solver.ising_penalty);
        }
    }

    const std::size_t per_instance = n_alg * runs;
    std::vector<RunRecord> records(instances.size() * per_instance);
    std::vector<char> done(records.size(), 0);
    parallel_for(records.size(), spec.jobs, [&](std::size_t task) {
        const std::size_t k = task / per_instance;
        const std::size_t a = (task % per_instance) / runs;
        const std::size_t r = task % runs;
        if (!instances[k].error.empty()) {
            return;
        }
        const std::uint64_t seed = derive_seed(spec.seed, k, a, r);
        RunRecord rec = solve_once(spec.algorithms[a], instances[k].J, fields[k], spec.solver, seed,
                                   spec.time_budget);
        rec.instance = instances[k].name;
        records[task] = std::move(rec);
        done[task] = 1;
    });

    ExperimentResult result;
    std::vector<std::vector<double>> probs(n_alg);
    for (std::size_t k = 0; k < instances.size(); ++k) {
        InstanceOutcome io;
        io.name = instances[k].name;
        io.n = instances[k].J.size();
        io.error = instances[k].error;
        if (!io.error.empty()) {
            result.instances.push_back(std::move(io));
            continue;
        }
        const auto begin = k * per_instance;
        double consensus = records[begin].best_energy;
        for (std::size_t t = begin; t < begin + per_instance; ++t) {
            consensus = std::min(consensus, records[t].best_energy);
        }
        io.reference = consensus;
        if (spec.reference_policy == ReferencePolicy::metadata && instances[k].graph
            && spec.model.kind == ModelTag::Kind::ising) {
            const auto it = spec.metadata.find(io.name);
            if (it != spec.metadata.end()) {
                double penalty = 0.0;
                for (const auto& term : fields[k].terms()) {
                    penalty += std::accumulate(term.h.begin(), term.h.end(), 0.0);
                }
                io.reference = 4.0 * (instances[k].cut_offset - it->second) - penalty;
                const double tol = spec.success_rtol * std::abs(io.reference);
                io.reference_violated = consensus < io.reference - tol;
            }
        }
        for (std::size_t a = 0; a < n_alg; ++a) {
            std::vector<double> energies;
            for (std::size_t r = 0; r < runs; ++r) {
                energies.push_back(records[begin + a * runs + r].best_energy);
            }
            MethodOutcome mo;
            mo.method = algorithm_name(spec.algorithms[a]);
            mo.best_energy = *std::min_element(energies.begin(), energies.end());
            mo.success_probability = success_probability(energies, io.reference, spec.success_rtol);
            mo.runs = static_cast<int>(runs);
            probs[a].push_back(mo.success_probability);
            io.methods.push_back(std::move(mo));
        }
        result.instances.push_back(std::move(io));
    }

    for (std::size_t a = 0; a < n_alg; ++a) {
        SuccessStats s;
        s.method = algorithm_name(spec.algorithms[a]);
        for (const auto& io : result.instances) {
            if (io.error.empty()) {
                s.instances.push_back(io.name);
            }
        }
        s.probabilities = probs[a];
        s.histogram = probability_histogram(s.probabilities);
        s.mean = s.probabilities.empty()
                     ? 0.0
                     : std::accumulate(s.probabilities.begin(), s.probabilities.end(), 0.0)
                           / static_cast<double>(s.probabilities.size());
        result.stats.push_back(std::move(s));
    }

    for (std::size_t t = 0; t < records.size(); ++t) {
        if (done[t]) {
            result.records.push_back(std::move(records[t]));
        }
    }
    if (spec.archive) {
        std::ofstream out(*spec.archive);
        if (!out) {
            throw std::runtime_error("cannot write archive " + spec.archive->string());
        }
        write_archive(out, result.records);
    }
    return result;
}

std::vector<MaxCutStats> run_maxcut_suite(const std::vector<std::pair<std::string, WeightedGraph>>& graphs,
                                          const MaxCutSuiteSpec& spec, std::vector<RunRecord>* records)
{
    if (spec.runs_per_instance < 1) {
        throw std::invalid_argument("runs_per_instance must be >= 1");
    }
    std::vector<MaxCutStats> out;
    for (std::size_t k = 0; k < graphs.size(); ++k) {
        const auto& [name, graph] = graphs[k];
        const IsingMapping mapping = ising_from_maxcut(graph);
        const FieldSpec fields = fields_for_model(mapping.J, ModelTag::ising(), spec.solver.ising_penalty);

        std::vector<RunRecord> recs(static_cast<std::size_t>(spec.runs_per_instance));
        parallel_for(recs.size(), spec.jobs, [&](std::size_t r) {
            RunRecord rec = solve_once(spec.algorithm, mapping.J, fields, spec.solver,
                                       derive_seed(spec.seed, k, r), spec.time_budget);
            rec.instance = name;
            recs[r] = std::move(rec);
        });

        MaxCutStats st;
        st.name = name;
        st.n = graph.size();
        st.edges = graph.edges().size();
        st.runs = spec.runs_per_instance;
        double sum = 0.0;
        for (std::size_t r = 0; r < recs.size(); ++r) {
            const double cut = maxcut_value(graph, recs[r].best_conf);
            sum += cut;
            st.best_cut = r == 0 ? cut : std::max(st.best_cut, cut);
            st.converged += recs[r].converged ? 1 : 0;
        }
        st.mean_cut = sum / static_cast<double>(recs.size());
        const auto it = spec.metadata.find(name);
        if (it != spec.metadata.end() && it->second != 0.0) {
            st.best_known = it->second;
            st.best_deviation_pct = 100.0 * (it->second - st.best_cut) / it->second;
            st.mean_deviation_pct = 100.0 * (it->second - st.mean_cut) / it->second;
        }
        out.push_back(std::move(st));
        if (records != nullptr) {
            for (auto& r : recs) {
                records->push_back(std::move(r));
            }
        }
    }
    return out;
}

ScalingFit fit_loglog(std::vector<double> sizes, std::vector<double> times, std::string label)
{
    if (sizes.size() != times.size()) {
        throw DimensionError("sizes and times differ in length");
    }
    if (sizes.size() < 2) {
        throw std::invalid_argument("a scaling fit needs at least two sizes");
    }
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        if (!(sizes[k] > 0.0) || !(times[k] > 0.0)) {
            throw std::invalid_argument("sizes and times must be positive");
        }
        if (k > 0 && !(sizes[k] > sizes[k - 1])) {
            throw std::invalid_argument("sizes must be strictly increasing");
        }
    }
    const std::size_t m = sizes.size();
    std::vector<double> x(m);
    std::vector<double> y(m);
    for (std::size_t k = 0; k < m; ++k) {
        x[k] = std::log(sizes[k]);
        y[k] = std::log(times[k]);
    }
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(m);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(m);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
        syy += (y[k] - my) * (y[k] - my);
    }
    ScalingFit fit;
    fit.label = std::move(label);
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double r = y[k] - (fit.slope * x[k] + fit.intercept);
        fit.residuals.push_back(r);
        ss_res += r * r;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    fit.sizes = std::move(sizes);
    fit.times = std::move(times);
    return fit;
}

ScalingFit scaling_study(const std::vector<std::size_t>& sizes, int repeats, const RunTimer& timer,
                         std::string label)
{
    if (repeats < 1) {
        throw std::invalid_argument("scaling study needs repeats >= 1");
    }
    std::vector<double> ns;
    std::vector<double> ts;
    for (std::size_t n : sizes) {
        double total = 0.0;
        for (int r = 0; r < repeats; ++r) {
            total += timer(n, r);
        }
        ns.push_back(static_cast<double>(n));
        ts.push_back(total / repeats);
    }
    return fit_loglog(std::move(ns), std::move(ts), std::move(label));
}

RunTimer make_solver_timer(Algorithm algorithm, const SolverConfig& config, std::uint64_t seed,
                           EnsembleKind kind)
{
    return [=](std::size_t n, int rep) {
        EnsembleSpec es;
        es.kind = kind;
        es.n = n;
        es.seed = derive_seed(seed, n, static_cast<std::uint64_t>(rep));
        const CouplingMatrix J = generate(es);
        const RunRecord rec =
            solve_once(algorithm, J, FieldSpec{}, config, derive_seed(seed, n, static_cast<std::uint64_t>(rep), 1));
        return rec.wall_time;
    };
}

double project_hw_time(const RunRecord& record, double feedback_latency)
{
    return static_cast<double>(record.feedback_updates) * feedback_latency;
}

// ---------------------------------------------------------------------------
// Persistence

std::string run_record_to_json(const RunRecord& r)
{
    json doc;
    doc["schema"] = kRunRecordSchema;
    doc["method"] = r.method;
    doc["instance"] = r.instance;
    doc["seed"] = r.seed;
    doc["best_energy"] = r.best_energy;
    doc["model"] = r.best_conf.tag().name();
    doc["theta"] = r.best_conf.theta();
    doc["iterations"] = r.iterations;
    doc["feedback_updates"] = r.feedback_updates;
    doc["wall_time"] = r.wall_time;
    doc["converged"] = r.converged;
    if (!r.trajectory.empty()) {
        auto traj = json::array();
        for (const auto& s : r.trajectory) {
            traj.push_back({{"t", s.t}, {"rho", s.rho}, {"theta", s.theta}, {"gamma_inj", s.gamma_inj}});
        }
        doc["trajectory"] = std::move(traj);
    }
    return doc.dump();
}

RunRecord run_record_from_json(const std::string& line)
{
    try {
        const json doc = json::parse(line);
        if (doc.at("schema").get<std::string>() != kRunRecordSchema) {
            throw std::invalid_argument("unsupported run record schema");
        }
        RunRecord r;
        r.method = doc.at("method").get<std::string>();
        r.instance = doc.at("instance").get<std::string>();
        r.seed = doc.at("seed").get<std::uint64_t>();
        r.best_energy = doc.at("best_energy").get<double>();
        r.best_conf = SpinConfiguration(doc.at("theta").get<std::vector<double>>(),
                                        parse_model_tag(doc.at("model").get<std::string>()));
        r.iterations = doc.at("iterations").get<std::int64_t>();
        r.feedback_updates = doc.at("feedback_updates").get<std::int64_t>();
        r.wall_time = doc.at("wall_time").get<double>();
        r.converged = doc.at("converged").get<bool>();
        if (doc.contains("trajectory")) {
            for (const auto& s : doc["trajectory"]) {
                TrajectorySample smp;
                smp.t = s.at("t").get<double>();
                smp.rho = s.at("rho").get<std::vector<double>>();
                smp.theta = s.at("theta").get<std::vector<double>>();
                smp.gamma_inj = s.at("gamma_inj").get<std::vector<double>>();
                r.trajectory.push_back(std::move(smp));
            }
        }
        return r;
    }
    catch (const json::exception& e) {
        throw std::invalid_argument(std::string("invalid run record: ") + e.what());
    }
}

void write_archive(std::ostream& out, const std::vector<RunRecord>& records)
{
    for (const auto& r : records) {
        out << run_record_to_json(r) << '\n';
    }
}

std::vector<RunRecord> read_archive(std::istream& in)
{
    std::vector<RunRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        out.push_back(run_record_from_json(line));
    }
    return out;
}

void write_success_csv(std::ostream& out, const ExperimentResult& result)
{
    out << "method,instance,n,reference_energy,best_energy,success_probability,runs\n";
    for (const auto& io : result.instances) {
        for (const auto& m : io.methods) {
            out << m.method << ',' << io.name << ',' << io.n << ',';
            write_double(out, io.reference);
            out << ',';
            write_double(out, m.best_energy);
            out << ',';
            write_double(out, m.success_probability);
            out << ',' << m.runs << '\n';
        }
    }
}

void write_histogram_csv(std::ostream& out, const ExperimentResult& result)
{
    out << "method,bin_low,bin_high,count\n";
    for (const auto& s : result.stats) {
        for (std::size_t b = 0; b < s.histogram.size(); ++b) {
            out << s.method << ',' << static_cast<double>(b) / 10.0 << ','
                << static_cast<double>(b + 1) / 10.0 << ',' << s.histogram[b] << '\n';
        }
    }
}

void write_scaling_csv(std::ostream& out, const ScalingFit& fit)
{
    out << "label,n,time_s,log_n,log_time,fitted_log_time,residual,slope,intercept\n";
    for (std::size_t k = 0; k < fit.sizes.size(); ++k) {
        const double ln = std::log(fit.sizes[k]);
        out << fit.label << ',' << fit.sizes[k] << ',';
        write_double(out, fit.times[k]);
        out << ',';
        write_double(out, ln);
        out << ',';
        write_double(out, std::log(fit.times[k]));
        out << ',';
        write_double(out, fit.slope * ln + fit.intercept);
        out << ',';
        write_double(out, fit.residuals[k]);
        out << ',';
        write_double(out, fit.slope);
        out << ',';
        write_double(out, fit.intercept);
        out << '\n';
    }
}

void write_maxcut_csv(std::ostream& out, const std::vector<MaxCutStats>& stats)
{
    out << "instance,n,edges,runs,converged,best_cut,mean_cut,best_known,best_deviation_pct,"
           "mean_deviation_pct\n";
    const auto opt = [&](const std::optional<double>& v) {
        if (v) {
            write_double(out, *v);
        }
    };
    for (const auto& s : stats) {
        out << s.name << ',' << s.n << ',' << s.edges << ',' << s.runs << ',' << s.converged << ',';
        write_double(out, s.best_cut);
        out << ',';
        write_double(out, s.mean_cut);
        out << ',';
        opt(s.best_known);
        out << ',';
        opt(s.best_deviation_pct);
        out << ',';
        opt(s.mean_deviation_pct);
        out << '\n';
    }
}

} // namespace gdspin
