#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "oplearn/families.hpp"
#include "oplearn/pde.hpp"

namespace oplearn {

enum class CaseId { Wave1d1, Wave1d2, Wave1dB, Wave2d, Burgers1, BurgersMulti, Kdv, Schrodinger };

const std::vector<CaseId>& all_cases();
std::string case_name(CaseId id);  // "wave1d-1", "burgers-multi", ...
CaseId case_from_name(std::string_view name);

FamilyId case_family(CaseId id);
PdeSpec case_pde(CaseId id);

}  // namespace oplearn
