#pragma once

#include "borelheat/borel.hpp"
#include "borelheat/model.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace borelheat::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Model definition file: one `key = value` per line, `#` starts a comment.
///
///   dimension      = 1
///   omega          = 1
///   phi            = ground_state          # or a whitelist expression, e.g. exp(-x^2/8)
///   measure.atoms  = [[1, 0.5, 0], [-1, 0.5, 0]]   # [xi..., Re w, Im w] per atom
///   regularity.a   = 1
///   regularity.R   = 0
///   regularity.kappa = 1
///   domain.L       = 12
///
/// `phi = ground_state` takes the positive periodic ground state of the measure's
/// potential and shifts the measure by its energy. omega = 0 with phi = 1 and no
/// atoms is the free model.
struct ModelFile {
    int dimension = 1;
    double omega = 0.0;
    std::string phi = "1";
    std::optional<SymmetricMeasure> measure;
    std::optional<RegularityParams> regularity;
    std::optional<double> domain_half_width;
};

ModelFile parse_model_file(std::string_view text);
ModelFile load_model_file(const std::string& path);
ModelSpec build_model(const ModelFile& file);

/// Series file: one `index value` pair per line; missing indices are zero.
FormalSeries parse_series(std::string_view text);

std::string sha256_hex(std::string_view data);

/// Runs the command line; returns the process exit code (0 ok, 2 input error,
/// 3 numerical failure). Results go to --out or `out`; diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace borelheat::cli
