#include "gdspin/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gdspin {

namespace {

void require_size(std::size_t expected, std::size_t got, const char* what)
{
    if (expected != got) {
        std::ostringstream msg;
        msg << what << ": expected " << expected << " entries, got " << got;
        throw DimensionError(msg.str());
    }
}

// Sum over ordered pairs i != j of J_ij cos(theta_i - theta_j), rows
// accumulated separately in ascending index order.
double coupling_sum(const CouplingMatrix& J, std::span<const double> theta)
{
    double total = 0.0;
    for (std::size_t i = 0; i < J.size(); ++i) {
        double row = 0.0;
        const double ti = theta[i];
        J.for_each_in_row(i, [&](std::size_t j, double v, std::size_t) {
            row += v * std::cos(ti - theta[j]);
        });
        total += row;
    }
    return total;
}

double field_sum(const FieldSpec& fields, double rho_th, std::span<const double> theta)
{
    double total = 0.0;
    for (const auto& term : fields.terms()) {
        const double scale = std::pow(rho_th, 0.5 * term.q - 1.0);
        double s = 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            s += term.h[i] * std::cos(term.q * theta[i]);
        }
        total += scale * s;
    }
    return total;
}

} // namespace

// ---------------------------------------------------------------------------
// CouplingMatrix

CouplingMatrix CouplingMatrix::dense(std::size_t n, std::vector<double> entries)
{
    require_size(n * n, entries.size(), "dense coupling matrix");
    for (std::size_t i = 0; i < n; ++i) {
        if (entries[i * n + i] != 0.0) {
            throw std::invalid_argument("coupling matrix must have a zero diagonal");
        }
        for (std::size_t j = i + 1; j < n; ++j) {
            if (entries[i * n + j] != entries[j * n + i]) {
                throw std::invalid_argument("coupling matrix must be symmetric");
            }
        }
    }
    CouplingMatrix m;
    m.n_ = n;
    m.kind_ = StorageKind::dense;
    m.dense_ = std::move(entries);
    return m;
}

CouplingMatrix CouplingMatrix::dense_from_triplets(std::size_t n, std::span<const Triplet> upper)
{
    std::vector<double> entries(n * n, 0.0);
    std::vector<char> seen(n * n, 0);
    for (const auto& t : upper) {
        if (t.i >= n || t.j >= n) {
            throw std::invalid_argument("coupling index out of range");
        }
        if (t.i == t.j) {
            throw std::invalid_argument("coupling matrix must have a zero diagonal");
        }
        const auto [a, b] = std::minmax(t.i, t.j);
        if (seen[a * n + b]) {
            throw std::invalid_argument("duplicate coupling entry");
        }
        seen[a * n + b] = 1;
        entries[a * n + b] = t.value;
        entries[b * n + a] = t.value;
    }
    return dense(n, std::move(entries));
}

CouplingMatrix CouplingMatrix::sparse(std::size_t n, std::span<const Triplet> upper)
{
    std::vector<Triplet> full;
    full.reserve(2 * upper.size());
    for (const auto& t : upper) {
        if (t.i >= n || t.j >= n) {
            throw std::invalid_argument("coupling index out of range");
        }
        if (t.i == t.j) {
            throw std::invalid_argument("coupling matrix must have a zero diagonal");
        }
        full.push_back({t.i, t.j, t.value});
        full.push_back({t.j, t.i, t.value});
    }
    std::sort(full.begin(), full.end(), [](const Triplet& a, const Triplet& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    for (std::size_t k = 1; k < full.size(); ++k) {
        if (full[k].i == full[k - 1].i && full[k].j == full[k - 1].j) {
            throw std::invalid_argument("duplicate coupling entry");
        }
    }

    CouplingMatrix m;
    m.n_ = n;
    m.kind_ = StorageKind::sparse;
    m.row_ptr_.assign(n + 1, 0);
    m.cols_.reserve(full.size());
    m.values_.reserve(full.size());
    for (const auto& t : full) {
        ++m.row_ptr_[t.i + 1];
        m.cols_.push_back(static_cast<std::uint32_t>(t.j));
        m.values_.push_back(t.value);
    }
    for (std::size_t i = 0; i < n; ++i) {
        m.row_ptr_[i + 1] += m.row_ptr_[i];
    }
    return m;
}

double CouplingMatrix::operator()(std::size_t i, std::size_t j) const
{
    if (i >= n_ || j >= n_) {
        throw std::out_of_range("coupling index out of range");
    }
    if (kind_ == StorageKind::dense) {
        return dense_[i * n_ + j];
    }
    const auto first = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    const auto last = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(j));
    if (it == last || *it != j) {
        return 0.0;
    }
    return values_[static_cast<std::size_t>(it - cols_.begin())];
}

std::span<const double> CouplingMatrix::dense_row(std::size_t i) const
{
    if (kind_ != StorageKind::dense) {
        throw std::logic_error("dense_row on sparse storage");
    }
    return {dense_.data() + i * n_, n_};
}

std::vector<Triplet> CouplingMatrix::upper_triplets() const
{
    std::vector<Triplet> out;
    for (std::size_t i = 0; i < n_; ++i) {
        for_each_in_row(i, [&](std::size_t j, double v, std::size_t) {
            if (j > i && v != 0.0) {
                out.push_back({i, j, v});
            }
        });
    }
    return out;
}

double CouplingMatrix::max_abs_row_sum() const
{
    double best = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for_each_in_row(i, [&](std::size_t, double v, std::size_t) { s += std::abs(v); });
        best = std::max(best, s);
    }
    return best;
}

double CouplingMatrix::max_abs() const
{
    double best = 0.0;
    const auto& v = kind_ == StorageKind::dense ? dense_ : values_;
    for (double x : v) {
        best = std::max(best, std::abs(x));
    }
    return best;
}

std::size_t CouplingMatrix::row_nonzeros(std::size_t i) const
{
    std::size_t count = 0;
    for_each_in_row(i, [&](std::size_t, double v, std::size_t) { count += v != 0.0; });
    return count;
}

CouplingMatrix CouplingMatrix::scaled(double factor) const
{
    CouplingMatrix m = *this;
    for (double& x : m.dense_) {
        x *= factor;
    }
    for (double& x : m.values_) {
        x *= factor;
    }
    return m;
}

CouplingMatrix CouplingMatrix::to_dense() const
{
    if (kind_ == StorageKind::dense) {
        return *this;
    }
    const auto t = upper_triplets();
    return dense_from_triplets(n_, t);
}

CouplingMatrix CouplingMatrix::to_sparse() const
{
    if (kind_ == StorageKind::sparse) {
        return *this;
    }
    const auto t = upper_triplets();
    return sparse(n_, t);
}

bool operator==(const CouplingMatrix& a, const CouplingMatrix& b)
{
    return a.n_ == b.n_ && a.kind_ == b.kind_ && a.dense_ == b.dense_ && a.row_ptr_ == b.row_ptr_
           && a.cols_ == b.cols_ && a.values_ == b.values_;
}

// ---------------------------------------------------------------------------
// ModelTag, FieldSpec

ModelTag ModelTag::potts(int q)
{
    if (q < 3) {
        throw std::invalid_argument("potts model needs q >= 3");
    }
    return {Kind::potts, q};
}

std::string ModelTag::name() const
{
    switch (kind) {
    case Kind::xy:
        return "xy";
    case Kind::ising:
        return "ising";
    case Kind::potts:
        return "potts:" + std::to_string(q);
    }
    return "xy";
}

ModelTag parse_model_tag(const std::string& text)
{
    if (text == "xy") {
        return ModelTag::xy();
    }
    if (text == "ising") {
        return ModelTag::ising();
    }
    if (text.rfind("potts:", 0) == 0) {
        std::size_t used = 0;
        const std::string digits = text.substr(6);
        int q = 0;
        try {
            q = std::stoi(digits, &used);
        }
        catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != digits.size()) {
            throw std::invalid_argument("invalid potts order in '" + text + "'");
        }
        return ModelTag::potts(q);
    }
    throw std::invalid_argument("unknown model '" + text + "' (expected xy, ising or potts:<q>)");
}

FieldSpec::FieldSpec(std::vector<FieldTerm> terms) : terms_(std::move(terms))
{
    for (std::size_t a = 0; a < terms_.size(); ++a) {
        if (terms_[a].q < 1) {
            throw std::invalid_argument("field resonance order must be >= 1");
        }
        for (std::size_t b = 0; b < a; ++b) {
            if (terms_[a].q == terms_[b].q) {
                throw std::invalid_argument("duplicate field term for q = "
                                            + std::to_string(terms_[a].q));
            }
        }
    }
    std::sort(terms_.begin(), terms_.end(),
              [](const FieldTerm& x, const FieldTerm& y) { return x.q < y.q; });
}

FieldSpec FieldSpec::ising(std::size_t n, double h2)
{
    return FieldSpec({FieldTerm{2, std::vector<double>(n, h2)}});
}

FieldSpec FieldSpec::potts(std::size_t n, int q, double hq)
{
    if (q < 3) {
        throw std::invalid_argument("potts model needs q >= 3");
    }
    return FieldSpec({FieldTerm{q, std::vector<double>(n, hq)}});
}

const FieldTerm* FieldSpec::find(int q) const noexcept
{
    for (const auto& t : terms_) {
        if (t.q == q) {
            return &t;
        }
    }
    return nullptr;
}

FieldSpec FieldSpec::scaled(double factor) const
{
    FieldSpec out = *this;
    for (auto& t : out.terms_) {
        for (double& h : t.h) {
            h *= factor;
        }
    }
    return out;
}

ModelTag FieldSpec::implied_model() const
{
    int order = 0;
    int count = 0;
    for (const auto& t : terms_) {
        if (t.q >= 2) {
            order = t.q;
            ++count;
        }
    }
    if (count != 1) {
        return ModelTag::xy();
    }
    return order == 2 ? ModelTag::ising() : ModelTag::potts(order);
}

std::optional<std::vector<double>> FieldSpec::external_field(double rho_th) const
{
    const FieldTerm* t = find(1);
    if (t == nullptr) {
        return std::nullopt;
    }
    std::vector<double> g(t->h);
    const double s = 1.0 / std::sqrt(rho_th);
    for (double& x : g) {
        x *= s;
    }
    return g;
}

void FieldSpec::check_size(std::size_t n) const
{
    for (const auto& t : terms_) {
        require_size(n, t.h.size(), "field term");
    }
}

std::vector<std::string> FieldSpec::validate_ising(const CouplingMatrix& J) const
{
    std::vector<std::string> warnings;
    const FieldTerm* t = find(2);
    if (t == nullptr) {
        warnings.emplace_back("no q = 2 term: phases are not forced to {0, pi}");
        return warnings;
    }
    const double h2 = t->h.empty() ? 0.0 : t->h.front();
    if (std::any_of(t->h.begin(), t->h.end(), [h2](double h) { return h != h2; })) {
        warnings.emplace_back("q = 2 amplitudes are not uniform");
    }
    const double bound = J.max_abs_row_sum();
    if (!(h2 > bound)) {
        std::ostringstream msg;
        msg << "Ising penalty h2 = " << h2 << " does not exceed max row sum " << bound;
        warnings.push_back(msg.str());
    }
    return warnings;
}

// ---------------------------------------------------------------------------
// SpinConfiguration, WeightedGraph

double wrap_phase(double theta) noexcept
{
    double r = std::fmod(theta, kTwoPi);
    if (r < 0.0) {
        r += kTwoPi;
    }
    if (r >= kTwoPi) {
        r = 0.0;
    }
    return r;
}

SpinConfiguration::SpinConfiguration(std::vector<double> theta, ModelTag tag)
    : theta_(std::move(theta)), tag_(tag)
{
    for (double& t : theta_) {
        t = wrap_phase(t);
    }
}

std::vector<int> SpinConfiguration::ising_spins() const
{
    if (tag_.kind != ModelTag::Kind::ising) {
        throw std::invalid_argument("configuration is not an Ising configuration");
    }
    std::vector<int> s(theta_.size());
    for (std::size_t i = 0; i < theta_.size(); ++i) {
        s[i] = std::cos(theta_[i]) > 0.0 ? 1 : -1;
    }
    return s;
}

WeightedGraph::WeightedGraph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges))
{
    for (auto& e : edges_) {
        if (e.i >= n_ || e.j >= n_) {
            throw std::invalid_argument("edge endpoint out of range");
        }
        if (e.i == e.j) {
            throw std::invalid_argument("self-loop on node " + std::to_string(e.i));
        }
        if (e.i > e.j) {
            std::swap(e.i, e.j);
        }
    }
    std::vector<std::pair<std::size_t, std::size_t>> keys;
    keys.reserve(edges_.size());
    for (const auto& e : edges_) {
        keys.emplace_back(e.i, e.j);
    }
    std::sort(keys.begin(), keys.end());
    if (std::adjacent_find(keys.begin(), keys.end()) != keys.end()) {
        throw std::invalid_argument("duplicate edge");
    }
}

double WeightedGraph::total_weight() const noexcept
{
    double w = 0.0;
    for (const auto& e : edges_) {
        w += e.w;
    }
    return w;
}

// ---------------------------------------------------------------------------
// Energies

double xy_energy(const CouplingMatrix& J, std::span<const double> g, const SpinConfiguration& conf,
                 FieldConvention convention)
{
    require_size(J.size(), conf.size(), "configuration");
    const auto& theta = conf.theta();
    double energy = -coupling_sum(J, theta);
    if (!g.empty()) {
        require_size(J.size(), g.size(), "external field");
        double f = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            f += g[i] * std::cos(theta[i]);
        }
        energy += convention == FieldConvention::plus_cosine ? f : -f;
    }
    return energy;
}

double xy_energy(const CouplingMatrix& J, const SpinConfiguration& conf)
{
    return xy_energy(J, {}, conf);
}

std::vector<double> xy_gradient(const CouplingMatrix& J, std::span<const double> g,
                                const SpinConfiguration& conf, FieldConvention convention)
{
    require_size(J.size(), conf.size(), "configuration");
    if (!g.empty()) {
        require_size(J.size(), g.size(), "external field");
    }
    const auto& theta = conf.theta();
    const double sign = convention == FieldConvention::plus_cosine ? -1.0 : 1.0;
    std::vector<double> grad(J.size());
    for (std::size_t k = 0; k < J.size(); ++k) {
        double s = 0.0;
        const double tk = theta[k];
        J.for_each_in_row(k, [&](std::size_t j, double v, std::size_t) {
            s += v * std::sin(tk - theta[j]);
        });
        grad[k] = 2.0 * s;
        if (!g.empty()) {
            grad[k] += sign * g[k] * std::sin(tk);
        }
    }
    return grad;
}

double generalized_energy(const CouplingMatrix& J, const FieldSpec& fields, double rho_th,
                          const SpinConfiguration& conf)
{
    require_size(J.size(), conf.size(), "configuration");
    fields.check_size(J.size());
    if (!(rho_th > 0.0)) {
        throw std::invalid_argument("rho_th must be positive");
    }
    const auto& theta = conf.theta();
    double energy = -coupling_sum(J, theta);
    if (!fields.empty()) {
        energy -= field_sum(fields, rho_th, theta);
    }
    return energy;
}

double generalized_energy_and_gradient(const CouplingMatrix& J, const FieldSpec& fields,
                                       double rho_th, std::span<const double> theta,
                                       std::span<double> grad)
{
    const std::size_t n = J.size();
    require_size(n, theta.size(), "phases");
    require_size(n, grad.size(), "gradient");
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double row = 0.0;
        double s = 0.0;
        const double tk = theta[k];
        J.for_each_in_row(k, [&](std::size_t j, double v, std::size_t) {
            const double d = tk - theta[j];
            row += v * std::cos(d);
            s += v * std::sin(d);
        });
        total += row;
        grad[k] = 2.0 * s;
    }
    double energy = -total;
    for (const auto& term : fields.terms()) {
        const double scale = std::pow(rho_th, 0.5 * term.q - 1.0);
        double f = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double a = term.q * theta[i];
            f += term.h[i] * std::cos(a);
            grad[i] += scale * term.h[i] * term.q * std::sin(a);
        }
        energy -= scale * f;
    }
    return energy;
}

std::vector<double> generalized_gradient(const CouplingMatrix& J, const FieldSpec& fields,
                                         double rho_th, std::span<const double> theta)
{
    fields.check_size(J.size());
    std::vector<double> grad(J.size());
    generalized_energy_and_gradient(J, fields, rho_th, theta, grad);
    return grad;
}

SpinConfiguration discretize(const SpinConfiguration& conf, ModelTag tag)
{
    if (!tag.is_discrete()) {
        throw std::invalid_argument("discretize needs an ising or potts model");
    }
    const int q = tag.q;
    const double step = kTwoPi / q;
    std::vector<double> out(conf.size());
    for (std::size_t i = 0; i < conf.size(); ++i) {
        const double x = conf[i] / step; // in [0, q)
        const double lower = std::floor(x);
        const double frac = x - lower;
        // frac == 0.5 is a tie between lower and lower + 1; lower is smaller
        // unless lower + 1 wraps to 0.
        long k = static_cast<long>(lower);
        if (frac > 0.5) {
            k += 1;
        }
        else if (frac == 0.5 && k + 1 == q) {
            k = 0;
        }
        if (k >= q) {
            k = 0;
        }
        out[i] = static_cast<double>(k) * step;
    }
    return SpinConfiguration(std::move(out), tag);
}

IsingMapping ising_from_maxcut(const WeightedGraph& graph, StorageKind storage)
{
    std::vector<Triplet> t;
    t.reserve(graph.edges().size());
    for (const auto& e : graph.edges()) {
        t.push_back({e.i, e.j, -e.w});
    }
    IsingMapping m;
    m.J = storage == StorageKind::sparse ? CouplingMatrix::sparse(graph.size(), t)
                                         : CouplingMatrix::dense_from_triplets(graph.size(), t);
    m.offset = 0.5 * graph.total_weight();
    return m;
}

double maxcut_value(const WeightedGraph& graph, const SpinConfiguration& spins)
{
    require_size(graph.size(), spins.size(), "spin configuration");
    const auto s = spins.ising_spins();
    double cut = 0.0;
    for (const auto& e : graph.edges()) {
        if (s[e.i] != s[e.j]) {
            cut += e.w;
        }
    }
    return cut;
}

double ising_energy(const CouplingMatrix& J, std::span<const int> spins)
{
    require_size(J.size(), spins.size(), "spins");
    double total = 0.0;
    for (std::size_t i = 0; i < J.size(); ++i) {
        double row = 0.0;
        J.for_each_in_row(i, [&](std::size_t j, double v, std::size_t) {
            row += v * static_cast<double>(spins[i] * spins[j]);
        });
        total += row;
    }
    return -total;
}

} // namespace gdspin
