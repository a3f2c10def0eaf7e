#pragma once

#include <string>
#include <vector>

#include "shadow/hamiltonian.hpp"

namespace shadow {

/// One template term: a Pauli word placed at the given site offsets,
/// repeated for every lattice site with periodic wrap. The main-text
/// model, for example, carries {0.25,"ZZ",{0,1}}, {0.3,"YY",{0,1}},
/// {0.3,"XX",{0,1}}, {0.25,"Z",{0}}, {0.3,"X",{0}}.
struct TermTemplate {
    double coeff = 0.0;
    std::string word;
    std::vector<int> offsets;
};

struct ModelSpec {
    std::string name;
    std::vector<TermTemplate> terms;
};

/// Builtin models: "main", "H1", "H2", "H3".
ModelSpec builtin_model(const std::string& name);
bool is_builtin_model(const std::string& name);
std::vector<std::string> builtin_model_names();

/// Load a model from a JSON file: {"name": ..., "terms": [{"coeff": c,
/// "word": "ZZ", "offsets": [0,1]}, ...]}.
ModelSpec load_model_file(const std::string& path);

/// Resolve either a builtin name or a path to a model file.
ModelSpec resolve_model(const std::string& name_or_path);

/// Expand the per-site templates over an L-site periodic chain.
HamiltonianSpec expand_model(const ModelSpec& model, int sites);

/// Order-independent hash of the expanded term list; used to refuse
/// comparisons between runs of different models.
std::string model_hash(const HamiltonianSpec& h);

} // namespace shadow
