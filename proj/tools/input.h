#ifndef PCOL_TOOLS_INPUT_H_
#define PCOL_TOOLS_INPUT_H_

#include <array>
#include <string>

#include "pcol/geometry.h"

namespace pcol::cli {

inline constexpr const char* kInputSchema = "pcol_input_v1";

struct ConjunctionInput {
  std::array<ObjectState, 2> objects;
  std::array<std::string, 2> labels;
};

// {"schema": "pcol_input_v1", "objects": [obj, obj]} with each obj holding
// position_m[3], velocity_mps[3], covariance_m2[3][3], radius_m and an
// optional label. Throws InvalidInput on any schema violation.
ConjunctionInput ParseConjunctionInput(const std::string& text);
ConjunctionInput ReadConjunctionInput(const std::string& path);

}  // namespace pcol::cli

#endif  // PCOL_TOOLS_INPUT_H_
