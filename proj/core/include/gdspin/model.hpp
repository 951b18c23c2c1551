#pragma once

// Spin-Hamiltonian problem instances and energy evaluation.
//
// Energies follow the ordered-pair convention: every unordered pair (i, j)
// contributes twice to the coupling sum, once as J_ij and once as J_ji.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gdspin {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kPi = 3.141592653589793238462643383279;

/// Raised when the sizes of a problem instance and its arguments disagree.
class DimensionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

enum class StorageKind { dense, sparse };

struct Triplet {
    std::size_t i;
    std::size_t j;
    double value;
};

/// Symmetric real coupling matrix with zero diagonal.
///
/// Dense storage keeps the full row-major n*n array. Sparse storage keeps a
/// CSR layout with both (i, j) and (j, i) present and columns ascending, so
/// row traversals visit entries in the same order as a dense row scan that
/// skips zeros. Every value position is addressed by a "slot" index which is
/// stable for the lifetime of the matrix; per-entry state such as adaptive
/// couplings can be stored in a parallel vector of size slot_count().
class CouplingMatrix {
  public:
    CouplingMatrix() = default;

    /// Builds dense storage from a row-major n*n array. Throws if the
    /// array is not symmetric or has a non-zero diagonal.
    static CouplingMatrix dense(std::size_t n, std::vector<double> entries);

    /// Builds sparse storage from upper-triangle triplets (i < j). Entries
    /// given with i > j are mirrored; duplicates and diagonal entries throw.
    static CouplingMatrix sparse(std::size_t n, std::span<const Triplet> upper);

    /// Dense matrix with the given upper-triangle entries mirrored.
    static CouplingMatrix dense_from_triplets(std::size_t n, std::span<const Triplet> upper);

    std::size_t size() const noexcept { return n_; }
    StorageKind storage() const noexcept { return kind_; }
    bool is_sparse() const noexcept { return kind_ == StorageKind::sparse; }

    double operator()(std::size_t i, std::size_t j) const;

    std::size_t slot_count() const noexcept
    {
        return kind_ == StorageKind::dense ? dense_.size() : values_.size();
    }
    double slot_value(std::size_t slot) const noexcept
    {
        return kind_ == StorageKind::dense ? dense_[slot] : values_[slot];
    }

    /// Calls f(j, value, slot) for every stored entry of row i with j != i,
    /// in ascending j.
    template <class F>
    void for_each_in_row(std::size_t i, F&& f) const
    {
        if (kind_ == StorageKind::dense) {
            const std::size_t base = i * n_;
            for (std::size_t j = 0; j < n_; ++j) {
                if (j != i) {
                    f(j, dense_[base + j], base + j);
                }
            }
        }
        else {
            for (std::size_t s = row_ptr_[i]; s < row_ptr_[i + 1]; ++s) {
                f(static_cast<std::size_t>(cols_[s]), values_[s], s);
            }
        }
    }

    /// Full row i of a dense matrix, diagonal included. Throws for sparse storage.
    std::span<const double> dense_row(std::size_t i) const;

    /// Upper-triangle non-zero entries (i < j), ordered by (i, j).
    std::vector<Triplet> upper_triplets() const;

    double max_abs_row_sum() const;
    double max_abs() const;
    std::size_t row_nonzeros(std::size_t i) const;

    /// Same storage kind and pattern, every value multiplied by factor.
    CouplingMatrix scaled(double factor) const;
    CouplingMatrix to_dense() const;
    CouplingMatrix to_sparse() const;

    friend bool operator==(const CouplingMatrix& a, const CouplingMatrix& b);

  private:
    std::size_t n_ = 0;
    StorageKind kind_ = StorageKind::dense;
    std::vector<double> dense_;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::uint32_t> cols_;
    std::vector<double> values_;
};

/// Which spin model a configuration represents.
struct ModelTag {
    enum class Kind { xy, ising, potts };
    Kind kind = Kind::xy;
    int q = 0; // number of states; 2 for ising, >= 3 for potts, 0 for xy

    static constexpr ModelTag xy() noexcept { return {Kind::xy, 0}; }
    static constexpr ModelTag ising() noexcept { return {Kind::ising, 2}; }
    static ModelTag potts(int q);

    bool is_discrete() const noexcept { return kind != Kind::xy; }
    std::string name() const;

    friend bool operator==(const ModelTag&, const ModelTag&) = default;
};

/// Parses "xy", "ising" or "potts:<q>".
ModelTag parse_model_tag(const std::string& text);

/// One resonant-field term: per-site amplitudes h_{q,i} of the q:1 resonance.
struct FieldTerm {
    int q = 1;
    std::vector<double> h;
};

/// Set of resonant-field terms. q = 1 acts as an external field, q = 2 as the
/// Ising penalty, q >= 3 as the q-state Potts restriction.
class FieldSpec {
  public:
    FieldSpec() = default;
    explicit FieldSpec(std::vector<FieldTerm> terms);

    /// Uniform q = 2 term with amplitude h2 on n sites.
    static FieldSpec ising(std::size_t n, double h2);
    /// Uniform q-th order term with amplitude hq on n sites.
    static FieldSpec potts(std::size_t n, int q, double hq);

    const std::vector<FieldTerm>& terms() const noexcept { return terms_; }
    bool empty() const noexcept { return terms_.empty(); }
    const FieldTerm* find(int q) const noexcept;

    /// Multiplies every amplitude by factor.
    FieldSpec scaled(double factor) const;

    /// Model implied by the terms: ising when the only q >= 2 term is q = 2,
    /// potts(q) when it is a single q >= 3 term, xy otherwise.
    ModelTag implied_model() const;

    /// External field g_i = h_{1,i} / sqrt(rho_th), if a q = 1 term exists.
    std::optional<std::vector<double>> external_field(double rho_th) const;

    /// Throws DimensionError when a term length differs from n.
    void check_size(std::size_t n) const;

    /// Human-readable warnings: non-uniform or too weak Ising penalty.
    std::vector<std::string> validate_ising(const CouplingMatrix& J) const;

  private:
    std::vector<FieldTerm> terms_;
};

/// Phases theta_i in [0, 2pi) plus the model they belong to.
class SpinConfiguration {
  public:
    SpinConfiguration() = default;
    /// Wraps every phase into [0, 2pi).
    explicit SpinConfiguration(std::vector<double> theta, ModelTag tag = ModelTag::xy());

    std::size_t size() const noexcept { return theta_.size(); }
    const std::vector<double>& theta() const noexcept { return theta_; }
    double operator[](std::size_t i) const noexcept { return theta_[i]; }
    ModelTag tag() const noexcept { return tag_; }

    /// Ising spins s_i = cos(theta_i) rounded to +-1. Throws unless the tag is ising.
    std::vector<int> ising_spins() const;

    friend bool operator==(const SpinConfiguration&, const SpinConfiguration&) = default;

  private:
    std::vector<double> theta_;
    ModelTag tag_ = ModelTag::xy();
};

/// Wraps an angle into [0, 2pi).
double wrap_phase(double theta) noexcept;

struct Edge {
    std::size_t i;
    std::size_t j;
    double w;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected weighted graph with 0-based nodes; edges stored with i < j.
class WeightedGraph {
  public:
    WeightedGraph() = default;
    /// Throws std::invalid_argument on self-loops, out-of-range nodes or
    /// duplicate edges. Edges given with i > j are normalized.
    WeightedGraph(std::size_t n, std::vector<Edge> edges);

    std::size_t size() const noexcept { return n_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    double total_weight() const noexcept;

    friend bool operator==(const WeightedGraph&, const WeightedGraph&) = default;

  private:
    std::size_t n_ = 0;
    std::vector<Edge> edges_;
};

/// Sign given to the external-field term of the XY energy.
enum class FieldConvention {
    plus_cosine,  ///< H = -sum J cos + sum g cos, the spin-Hamiltonian form
    minus_cosine, ///< H = -sum J cos - sum g cos, the form the dynamics optimise
};

/// XY energy -sum_{i != j} J_ij cos(theta_i - theta_j) +- sum_i g_i cos(theta_i).
double xy_energy(const CouplingMatrix& J, std::span<const double> g, const SpinConfiguration& conf,
                 FieldConvention convention = FieldConvention::plus_cosine);
double xy_energy(const CouplingMatrix& J, const SpinConfiguration& conf);

/// dH/dtheta_k = 2 sum_j J_kj sin(theta_k - theta_j) -+ g_k sin(theta_k).
std::vector<double> xy_gradient(const CouplingMatrix& J, std::span<const double> g,
                                const SpinConfiguration& conf,
                                FieldConvention convention = FieldConvention::plus_cosine);

/// Functional minimised by the gain-dissipative dynamics:
/// H_s = -sum_{i != j} J_ij cos(theta_ij) - sum_q rho_th^(q/2 - 1) sum_i h_qi cos(q theta_i).
double generalized_energy(const CouplingMatrix& J, const FieldSpec& fields, double rho_th,
                          const SpinConfiguration& conf);

/// Gradient of generalized_energy with respect to the phases.
std::vector<double> generalized_gradient(const CouplingMatrix& J, const FieldSpec& fields,
                                         double rho_th, std::span<const double> theta);

/// Energy and gradient in one pass over raw phases (no wrapping).
double generalized_energy_and_gradient(const CouplingMatrix& J, const FieldSpec& fields,
                                       double rho_th, std::span<const double> theta,
                                       std::span<double> grad);

/// Snaps every phase to the nearest of the q allowed values 2 pi k / q.
/// Ties go to the smaller value. Throws for an xy tag.
SpinConfiguration discretize(const SpinConfiguration& conf, ModelTag tag);

struct IsingMapping {
    CouplingMatrix J;
    double offset = 0.0; ///< half of the total edge weight
};

/// J_ij = -w_ij, so that Cut(s) = offset - H_ising(s) / 4.
IsingMapping ising_from_maxcut(const WeightedGraph& graph, StorageKind storage = StorageKind::sparse);

/// Total weight of edges whose endpoints carry different spins.
double maxcut_value(const WeightedGraph& graph, const SpinConfiguration& spins);

/// Ising energy -sum_{i != j} J_ij s_i s_j for +-1 spins.
double ising_energy(const CouplingMatrix& J, std::span<const int> spins);

} // namespace gdspin
