#ifndef QUASISL_CONFIG_HPP
#define QUASISL_CONFIG_HPP

#include <optional>
#include <string>

#include "quasisl/spectral.hpp"

namespace quasisl {

// Validated configuration document. All structural checks (dimensions,
// delta placement, grammar) happen at load time with path-qualified
// diagnostics; no computation starts on an invalid document.
struct ConfigDocument {
  Problem problem;
  BoundaryMatrix boundary;
  std::optional<SearchRegion> search;
  int max_count = 64;
  IntegratorOptions tolerances;
  double quad_tol = 1e-12;

  ConfigDocument(Problem p, BoundaryMatrix b)
      : problem(std::move(p)), boundary(std::move(b)) {}
};

ConfigDocument load_config_text(const std::string& json_text);
ConfigDocument load_config_file(const std::string& path);

// 17 significant digits; round-trippable doubles for CSV cells.
std::string format_double(double v);

}  // namespace quasisl

#endif
