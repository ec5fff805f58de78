#pragma once

#include <map>
#include <string>
#include <vector>

#include "bflow/fixtures.hpp"
#include "bflow/hermitian.hpp"

namespace bflow {

/// One structure constant mu(e_i, e_j) = c * [family value] * e_k, 1-based,
/// i < j; the antisymmetric orientation is implied. When `param` is set the
/// coefficient is c times the named family parameter.
struct BracketEntry {
    int i = 0;
    int j = 0;
    int k = 0;
    double c = 1.0;
    std::string param;
};

struct ModelFile {
    int dim = 0;
    std::vector<BracketEntry> bracket;
    // omega is kept in its source form so serialization round-trips:
    // preset "canonical", a pairing list, or an explicit matrix.
    std::string omega_preset;                      // "canonical" or empty
    std::vector<std::pair<int, int>> omega_pairs;  // 1-based, used when nonempty
    Matrix omega_matrix;                           // used when preset and pairs absent
    bool metric_identity = true;
    Matrix metric_matrix;
    std::map<std::string, double> family;
};

/// Parses and fully validates a model. Error messages carry the file name
/// and the line of the offending construct.
ModelFile parse_model(const std::string& text, const std::string& filename = "<model>");
ModelFile load_model(const std::string& path);

/// Canonical serialization: two-space indent, sorted keys, shortest
/// round-trip scalar formatting, trailing newline. parse . serialize = id.
std::string serialize_model(const ModelFile& m);
void save_model(const ModelFile& m, const std::string& path);

/// Materialized data. `family_override` replaces values of declared
/// parameters (unknown names are rejected).
LieBracket model_bracket(const ModelFile& m,
                         const std::map<std::string, double>& family_override = {});
Matrix model_omega(const ModelFile& m);
HermitianTriple model_triple(const ModelFile& m);

/// Embeds a fixture as a model, tagging family-scaled entries so sweeps can
/// vary the parameters.
ModelFile model_from_fixture(const Fixture& f);

}  // namespace bflow
