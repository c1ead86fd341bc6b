#pragma once

#include <string>
#include <vector>

#include "fclloop/fcl/ast.hpp"

namespace fclloop::fcl {

std::string render(const NumExpr& n);
std::string render(const Term& term);
std::string render(CmpOp op);

/// Canonical text with parentheses only where the grammar needs them.
std::string render(const FormulaPtr& formula);

/// `constraint "name" at start: <formula>`
std::string render(const Constraint& constraint);

/// Whole file, each constraint preceded by its gloss as a `##` line.
std::string render_file(const std::vector<Constraint>& constraints);

}  // namespace fclloop::fcl
