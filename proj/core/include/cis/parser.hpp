#ifndef CIS_PARSER_HPP
#define CIS_PARSER_HPP

#include <string>

#include "cis/model.hpp"

namespace cis {

// Parses the operation/constraint/bind DSL. `#` starts a comment (outside
// quotes), `\` at line end continues a statement. Throws ParseError with
// 1-based line:column on syntax errors, ValidationError on semantic ones.
Model parse_spec(const std::string& text);

// Canonical serialization; parse_spec(emit_text(m)) is structurally equal
// to m for any valid model.
std::string emit_text(const Model& model);

}  // namespace cis

#endif
