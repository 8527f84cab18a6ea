#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace ehspc::test {

inline std::filesystem::path tmp_dir(const std::string& sub) {
  const char* env = std::getenv("EHSPC_TEST_TMP");
  std::filesystem::path p = env ? env : std::filesystem::temp_directory_path() / "ehspc-tests";
  p /= sub;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

}  // namespace ehspc::test

#define CHECK_THROWS_CODE(expr, ecode)                       \
  do {                                                       \
    bool thrown_ = false;                                    \
    try {                                                    \
      (void)(expr);                                          \
    } catch (const ::ehspc::Error& e_) {                     \
      thrown_ = true;                                        \
      CHECK_MESSAGE(e_.code() == (ecode), e_.what());        \
    }                                                        \
    CHECK_MESSAGE(thrown_, "expected ehspc::Error: " #expr); \
  } while (0)
