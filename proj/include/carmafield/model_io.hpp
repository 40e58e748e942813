#pragma once

#include <string>

#include "carmafield/lattice_arma.hpp"

namespace carmafield {

/// Malformed input (JSON syntax or schema shape); distinct from domain errors
/// so callers can map it to a usage exit code.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelDocument {
  ModelSpec spec;
  LevyBasisSpec levy;
};

/// Schema: {"d", "mode": "carma"|"gcarma", "a": [[1,...],...] or
/// "A": [[[...],...],...], "b", "c"?, "p"?, "q"?, "levy": {"type", ...}}.
ModelDocument parse_model_document(const std::string& json_text);
ModelDocument load_model_document(const std::string& path);

std::string validation_report_json(const ValidationReport& report);
std::string lag_table_json(const std::map<Lag, double>& table);
std::string arma_representation_json(const ArmaRepresentation& repr,
                                     const SpectralCheck& check,
                                     const MaMatch* ma = nullptr);

}  // namespace carmafield
