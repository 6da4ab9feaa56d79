#pragma once

#include <string>

#ifndef RPG_FIXTURES_DIR
#define RPG_FIXTURES_DIR "tests/fixtures"
#endif

namespace testing_support {

inline std::string fixture(const std::string& rel) {
    return std::string(RPG_FIXTURES_DIR) + "/" + rel;
}

}  // namespace testing_support
