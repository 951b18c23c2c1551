#pragma once

// Random coupling ensembles, G-Set Max-Cut files, best-known metadata and
// the JSON matrix dump.

#include "gdspin/model.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace gdspin {

/// Parse failure carrying the 1-based line number of the offending input.
class ParseError : public std::runtime_error {
  public:
    ParseError(std::size_t line, const std::string& what);
    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

enum class EnsembleKind { dense, sparse3 };

/// How edge weights of the sparse ensemble are drawn.
enum class SparseWeightRule {
    /// Pick two distinct endpoints a < b from {-b0, -0.3 b0, 0.3 b0, b0}, then uniform in [a, b].
    random_endpoints,
    /// Uniform over [-b0, b0] with (-0.3 b0, 0.3 b0) removed.
    excluded_gap,
};

struct EnsembleSpec {
    EnsembleKind kind = EnsembleKind::dense;
    std::size_t n = 2;
    double bound = 10.0;
    std::uint64_t seed = 0;
    SparseWeightRule weight_rule = SparseWeightRule::random_endpoints;

    void validate() const;
};

/// Symmetric dense matrix with off-diagonal entries uniform in [-bound, bound].
CouplingMatrix gen_dense(const EnsembleSpec& spec);

/// Random 3-regular graph (pairing model with rejection) with random weights,
/// sparse storage.
CouplingMatrix gen_sparse3(const EnsembleSpec& spec);

/// Dispatches on spec.kind.
CouplingMatrix generate(const EnsembleSpec& spec);

/// Reads "n m" followed by m lines "i j w" with 1-based node indices.
WeightedGraph parse_gset(std::istream& in);
WeightedGraph read_gset_file(const std::filesystem::path& path);

/// Writes the G-Set text form; integral weights are printed without a fraction.
void write_gset(std::ostream& out, const WeightedGraph& graph);

/// Parses "name value" lines; '#' starts a comment.
std::map<std::string, double> parse_metadata(std::istream& in);
/// Missing file -> empty map.
std::map<std::string, double> load_metadata(const std::filesystem::path& path);

/// JSON matrix dump: {"format": "gdspin-matrix", "version": 1, "n": N,
/// "storage": "dense" | "sparse", "entries": [[i, j, value], ...]} with
/// 0-based i < j.
std::string matrix_to_json(const CouplingMatrix& J);
CouplingMatrix matrix_from_json(const std::string& text);

/// Graph whose Max-Cut Ising mapping reproduces J exactly (w_ij = -J_ij).
WeightedGraph graph_from_couplings(const CouplingMatrix& J);

/// A problem instance loaded from disk or generated.
struct Instance {
    std::string name;
    CouplingMatrix J;
    std::optional<WeightedGraph> graph; ///< present for Max-Cut inputs
    double cut_offset = 0.0;            ///< Cut = cut_offset - H_ising / 4
};

/// Loads "*.json" as a matrix dump and anything else as a G-Set graph.
Instance load_instance(const std::filesystem::path& path);

/// Parses "dense:N[:SEED[:BOUND]]" or "sparse3:N[:SEED]"; nullopt when the
/// text does not start with a known ensemble name.
std::optional<EnsembleSpec> parse_ensemble_spec(const std::string& text);

std::string ensemble_name(const EnsembleSpec& spec);

} // namespace gdspin
