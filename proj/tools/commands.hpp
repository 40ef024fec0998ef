#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "billiards/error.hpp"

namespace billiards::cli {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kSeedVariable = "BILLIARD_SEED";

enum Exit : int { Ok = 0, Usage = 1, InvalidCurve = 2, InputFailure = 3, Refused = 4, NumericFailure = 5 };

int exit_code(ErrorCode code);

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace billiards::cli
