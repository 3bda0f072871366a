#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "lpdl/crossed_product.hpp"
#include "lpdl/duality.hpp"
#include "lpdl/labeled_operator.hpp"

namespace lpdl {

/// Reports and exchange files use the insertion-ordered JSON type so field
/// order is stable and reruns of the same seed diff cleanly.
using Json = nlohmann::ordered_json;

// --- matrix exchange ---------------------------------------------------------
//
// An operator travels as
//
//   { "rows": 4, "cols": 4, "entries": [[re, im], ...],   // row-major
//     "row_space": ["G:Z4", "n:2"], "col_space": [...], "p": 1.5 }
//
// Tensor legs serialize as "name:token".  When the writer is told the group
// literal, group legs ("G", "Gd") carry it by name ("G:Z4"); otherwise the
// token is the plain size ("G:4").  The reader accepts both forms.

Json operator_to_json(const LabeledOperator& op, const std::string& group_literal = "");
LabeledOperator operator_from_json(const Json& j);

// --- coefficient functions ---------------------------------------------------

/// { "group": "Z4", "action": "phased:(0 1)@0,1/4",
///   "coeffs": { "(t-coords)": matrix } } with every coefficient written in
/// enumeration order and matrices as row-lists of [re, im] pairs.
Json cc_element_to_json(const CcElement& f);
CcElement cc_element_from_json(const Json& j);

/// Same layout for functions on dual-by-group points, keyed "(gamma)|(s)".
Json double_element_to_json(const DoubleCcElement& f);
DoubleCcElement double_element_from_json(const Json& j);

// --- shared pieces -----------------------------------------------------------

Json complex_to_json(const Cplx& z);
Cplx complex_from_json(const Json& j);
/// Two-dimensional array of [re, im] pairs, one inner array per matrix row.
Json cmatrix_to_json(const CMatrix& a);
CMatrix cmatrix_from_json(const Json& j);
/// "(1,0)" for the element with coordinates {1, 0}; "()" for the trivial group.
std::string coords_key(const GroupElement& t);
GroupElement coords_from_key(const std::string& key);

// --- files -------------------------------------------------------------------

/// std::runtime_error on unreadable/unwritable paths, std::invalid_argument on
/// malformed JSON (with the path in the message).
Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace lpdl
