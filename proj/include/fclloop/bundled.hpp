#pragma once

#include <string_view>

namespace fclloop {

/// The Dragon Hunt constraint file shipped with the toolkit.
std::string_view bundled_constraints_text();

/// The default prompt template.
std::string_view bundled_prompt_template_text();

}  // namespace fclloop
