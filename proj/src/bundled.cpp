#include "fclloop/bundled.hpp"

#include "fclloop_embedded.hpp"

namespace fclloop {

std::string_view bundled_constraints_text() { return embedded::kBundledConstraints; }

std::string_view bundled_prompt_template_text() { return embedded::kPromptTemplate; }

}  // namespace fclloop
