#pragma once

#include <string>
#include <string_view>

namespace seqjudge::detail {

std::string sha256_hex(std::string_view data);

}  // namespace seqjudge::detail
