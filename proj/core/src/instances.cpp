#include "gdspin/instances.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>
#include <vector>

namespace gdspin {

namespace {

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string strip_comment(const std::string& s)
{
    const auto hash = s.find('#');
    return trim(hash == std::string::npos ? s : s.substr(0, hash));
}

double sparse_weight(std::mt19937_64& rng, const EnsembleSpec& spec)
{
    const double b = spec.bound;
    if (spec.weight_rule == SparseWeightRule::random_endpoints) {
        const std::array<double, 4> ends{-b, -0.3 * b, 0.3 * b, b};
        std::uniform_int_distribution<int> pick(0, 3);
        const int a = pick(rng);
        int c = pick(rng);
        while (c == a) {
            c = pick(rng);
        }
        const double lo = std::min(ends[a], ends[c]);
        const double hi = std::max(ends[a], ends[c]);
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    }
    // excluded_gap: |w| uniform in [0.3 b, b], random sign
    const double mag = std::uniform_real_distribution<double>(0.3 * b, b)(rng);
    return std::bernoulli_distribution(0.5)(rng) ? mag : -mag;
}

// One pairing-model attempt; returns false on a self-loop or multi-edge.
bool try_pairing(std::mt19937_64& rng, std::size_t n, std::vector<std::pair<std::size_t, std::size_t>>& edges)
{
    std::vector<std::size_t> points(3 * n);
    for (std::size_t k = 0; k < points.size(); ++k) {
        points[k] = k / 3;
    }
    std::shuffle(points.begin(), points.end(), rng);
    edges.clear();
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (std::size_t k = 0; k < points.size(); k += 2) {
        auto [a, b] = std::minmax(points[k], points[k + 1]);
        if (a == b || !seen.emplace(a, b).second) {
            return false;
        }
        edges.emplace_back(a, b);
    }
    return true;
}

std::string format_weight(double w)
{
    std::ostringstream os;
    if (w == std::trunc(w) && std::abs(w) < 1e15) {
        os << static_cast<long long>(w);
    }
    else {
        os << std::setprecision(17) << w;
    }
    return os.str();
}

template <class T>
bool parse_number(const std::string& token, T& value)
{
    if constexpr (std::is_floating_point_v<T>) {
        // from_chars for double is unavailable on older libstdc++
        try {
            std::size_t used = 0;
            value = std::stod(token, &used);
            return used == token.size();
        }
        catch (const std::exception&) {
            return false;
        }
    }
    else {
        const auto* end = token.data() + token.size();
        const auto r = std::from_chars(token.data(), end, value);
        return r.ec == std::errc() && r.ptr == end;
    }
}

std::vector<std::string> split(const std::string& line)
{
    std::istringstream is(line);
    std::vector<std::string> out;
    std::string tok;
    while (is >> tok) {
        out.push_back(tok);
    }
    return out;
}

} // namespace

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line)
{}

void EnsembleSpec::validate() const
{
    if (n < 2) {
        throw std::invalid_argument("ensemble size must be >= 2");
    }
    if (!(bound > 0.0)) {
        throw std::invalid_argument("ensemble bound must be positive");
    }
    if (kind == EnsembleKind::sparse3) {
        if (n < 4) {
            throw std::invalid_argument("sparse3 ensemble needs n >= 4");
        }
        if (n % 2 != 0) {
            throw std::invalid_argument("sparse3 ensemble needs an even n");
        }
    }
}

CouplingMatrix gen_dense(const EnsembleSpec& spec)
{
    if (spec.kind != EnsembleKind::dense) {
        throw std::invalid_argument("gen_dense called with a non-dense spec");
    }
    spec.validate();
    const std::size_t n = spec.n;
    auto rng = substream(spec.seed, 0);
    std::uniform_real_distribution<double> u(-spec.bound, spec.bound);
    std::vector<double> m(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = u(rng);
            m[i * n + j] = v;
            m[j * n + i] = v;
        }
    }
    return CouplingMatrix::dense(n, std::move(m));
}

CouplingMatrix gen_sparse3(const EnsembleSpec& spec)
{
    if (spec.kind != EnsembleKind::sparse3) {
        throw std::invalid_argument("gen_sparse3 called with a non-sparse3 spec");
    }
    spec.validate();
    constexpr int kRetriesPerStream = 1000;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::uint64_t stream = 1;; ++stream) {
        auto rng = substream(spec.seed, stream);
        for (int attempt = 0; attempt < kRetriesPerStream; ++attempt) {
            if (!try_pairing(rng, spec.n, edges)) {
                continue;
            }
            std::sort(edges.begin(), edges.end());
            std::vector<Triplet> t;
            t.reserve(edges.size());
            for (const auto& [a, b] : edges) {
                t.push_back({a, b, sparse_weight(rng, spec)});
            }
            return CouplingMatrix::sparse(spec.n, t);
        }
    }
}

CouplingMatrix generate(const EnsembleSpec& spec)
{
    return spec.kind == EnsembleKind::dense ? gen_dense(spec) : gen_sparse3(spec);
}

WeightedGraph parse_gset(std::istream& in)
{
    std::string line;
    std::size_t lineno = 0;
    std::size_t n = 0;
    std::size_t m = 0;
    bool have_header = false;
    std::vector<Edge> edges;
    std::set<std::pair<std::size_t, std::size_t>> seen;

    while (std::getline(in, line)) {
        ++lineno;
        const auto tokens = split(strip_comment(line));
        if (tokens.empty()) {
            continue;
        }
        if (!have_header) {
            if (tokens.size() != 2 || !parse_number(tokens[0], n) || !parse_number(tokens[1], m)) {
                throw ParseError(lineno, "expected header 'n m'");
            }
            if (n == 0) {
                throw ParseError(lineno, "node count must be positive");
            }
            have_header = true;
            edges.reserve(m);
            continue;
        }
        std::size_t i = 0;
        std::size_t j = 0;
        double w = 0.0;
        if (tokens.size() != 3 || !parse_number(tokens[0], i) || !parse_number(tokens[1], j)
            || !parse_number(tokens[2], w)) {
            throw ParseError(lineno, "expected edge 'i j w'");
        }
        if (i < 1 || j < 1 || i > n || j > n) {
            throw ParseError(lineno, "node index out of range 1.." + std::to_string(n));
        }
        if (i == j) {
            throw ParseError(lineno, "self-loop on node " + std::to_string(i));
        }
        if (edges.size() == m) {
            throw ParseError(lineno, "more edges than the declared " + std::to_string(m));
        }
        const std::pair key{std::min(i, j) - 1, std::max(i, j) - 1};
        if (!seen.insert(key).second) {
            throw ParseError(lineno, "duplicate edge " + std::to_string(i) + " " + std::to_string(j));
        }
        edges.push_back({i - 1, j - 1, w});
    }
    if (!have_header) {
        throw ParseError(lineno + 1, "missing header");
    }
    if (edges.size() != m) {
        throw ParseError(lineno + 1, "expected " + std::to_string(m) + " edges, found "
                                         + std::to_string(edges.size()));
    }
    return WeightedGraph(n, std::move(edges));
}

WeightedGraph read_gset_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return parse_gset(in);
}

void write_gset(std::ostream& out, const WeightedGraph& graph)
{
    out << graph.size() << ' ' << graph.edges().size() << '\n';
    for (const auto& e : graph.edges()) {
        out << e.i + 1 << ' ' << e.j + 1 << ' ' << format_weight(e.w) << '\n';
    }
}

std::map<std::string, double> parse_metadata(std::istream& in)
{
    std::map<std::string, double> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto tokens = split(strip_comment(line));
        if (tokens.empty()) {
            continue;
        }
        double v = 0.0;
        if (tokens.size() != 2 || !parse_number(tokens[1], v)) {
            throw ParseError(lineno, "expected 'name value'");
        }
        out[tokens[0]] = v;
    }
    return out;
}

std::map<std::string, double> load_metadata(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        return {};
    }
    return parse_metadata(in);
}

std::string matrix_to_json(const CouplingMatrix& J)
{
    nlohmann::json doc;
    doc["format"] = "gdspin-matrix";
    doc["version"] = 1;
    doc["n"] = J.size();
    doc["storage"] = J.is_sparse() ? "sparse" : "dense";
    auto entries = nlohmann::json::array();
    for (const auto& t : J.upper_triplets()) {
        entries.push_back({t.i, t.j, t.value});
    }
    doc["entries"] = std::move(entries);
    return doc.dump() + "\n";
}

CouplingMatrix matrix_from_json(const std::string& text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
        if (doc.at("format").get<std::string>() != "gdspin-matrix") {
            throw std::invalid_argument("not a gdspin-matrix document");
        }
        if (doc.at("version").get<int>() != 1) {
            throw std::invalid_argument("unsupported matrix version");
        }
        const auto n = doc.at("n").get<std::size_t>();
        const auto storage = doc.value("storage", std::string("sparse"));
        std::vector<Triplet> t;
        for (const auto& e : doc.at("entries")) {
            if (!e.is_array() || e.size() != 3) {
                throw std::invalid_argument("matrix entries must be [i, j, value]");
            }
            t.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>(), e[2].get<double>()});
        }
        if (storage == "dense") {
            return CouplingMatrix::dense_from_triplets(n, t);
        }
        if (storage == "sparse") {
            return CouplingMatrix::sparse(n, t);
        }
        throw std::invalid_argument("unknown storage '" + storage + "'");
    }
    catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("invalid matrix JSON: ") + e.what());
    }
}

WeightedGraph graph_from_couplings(const CouplingMatrix& J)
{
    std::vector<Edge> edges;
    for (const auto& t : J.upper_triplets()) {
        edges.push_back({t.i, t.j, -t.value});
    }
    return WeightedGraph(J.size(), std::move(edges));
}

Instance load_instance(const std::filesystem::path& path)
{
    Instance inst;
    inst.name = path.stem().string();
    if (path.extension() == ".json") {
        std::ifstream in(path);
        if (!in) {
            throw std::runtime_error("cannot open " + path.string());
        }
        std::stringstream buf;
        buf << in.rdbuf();
        inst.J = matrix_from_json(buf.str());
        return inst;
    }
    WeightedGraph g = read_gset_file(path);
    auto mapping = ising_from_maxcut(g);
    inst.J = std::move(mapping.J);
    inst.cut_offset = mapping.offset;
    inst.graph = std::move(g);
    return inst;
}

std::optional<EnsembleSpec> parse_ensemble_spec(const std::string& text)
{
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
        if (c == ':') {
            parts.push_back(cur);
            cur.clear();
        }
        else {
            cur += c;
        }
    }
    parts.push_back(cur);

    EnsembleSpec spec;
    if (parts[0] == "dense") {
        spec.kind = EnsembleKind::dense;
    }
    else if (parts[0] == "sparse3") {
        spec.kind = EnsembleKind::sparse3;
    }
    else {
        return std::nullopt;
    }
    const std::size_t max_parts = spec.kind == EnsembleKind::dense ? 4 : 3;
    if (parts.size() < 2 || parts.size() > max_parts) {
        throw std::invalid_argument("ensemble spec must look like dense:N[:SEED[:BOUND]] or sparse3:N[:SEED]");
    }
    if (!parse_number(parts[1], spec.n)) {
        throw std::invalid_argument("invalid ensemble size '" + parts[1] + "'");
    }
    if (parts.size() > 2 && !parse_number(parts[2], spec.seed)) {
        throw std::invalid_argument("invalid ensemble seed '" + parts[2] + "'");
    }
    if (parts.size() > 3 && !parse_number(parts[3], spec.bound)) {
        throw std::invalid_argument("invalid ensemble bound '" + parts[3] + "'");
    }
    spec.validate();
    return spec;
}

std::string ensemble_name(const EnsembleSpec& spec)
{
    std::ostringstream os;
    os << (spec.kind == EnsembleKind::dense ? "dense" : "sparse3") << ':' << spec.n << ':' << spec.seed;
    if (spec.kind == EnsembleKind::dense && spec.bound != 10.0) {
        os << ':' << spec.bound;
    }
    return os.str();
}

} // namespace gdspin
