#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "phientropy/entropy.hpp"
#include "phientropy/operator.hpp"
#include "phientropy/phi_function.hpp"

namespace phientropy {

using Json = nlohmann::ordered_json;

/// {"d": int, "re": [[...]], "im": [[...]]}, row-major; "im" is written only for
/// matrices with a nonzero imaginary part and defaults to zero on input.
Json matrix_to_json(const CMatrix& m);
Json matrix_to_json(const HermitianMatrix& m);
CMatrix dense_matrix_from_json(const Json& j);
HermitianMatrix matrix_from_json(const Json& j);

/// Same format with d replaced by d^2.
Json operator_to_json(const MatrixOperator& t);

/// {"kind": "entropy" | "power" | "affine", "q"?, "slope"?, "intercept"?}
Json phi_to_json(const PhiFunction& phi);
PhiFunction phi_from_json(const Json& j);

/// {"factors": [[{"label", "p"}, ...], ...], "d": int,
///  "map": {"kind": "table", "entries": [{"x": [labels], "matrix": <matrix>}]}}
ProductModel model_from_json(const Json& j, bool psd = true);
Json model_to_json(const ProductModel& model);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace phientropy
