#include "vsql/error.hpp"

#include <fstream>
#include <sstream>

namespace vsql {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::parse:
      return "parse error";
    case ErrorKind::unsupported:
      return "unsupported construct";
    case ErrorKind::validation:
      return "validation error";
    case ErrorKind::resolution:
      return "resolution error";
    case ErrorKind::reconstruction:
      return "reconstruction error";
    case ErrorKind::gateway:
      return "gateway error";
    case ErrorKind::execution:
      return "execution error";
    case ErrorKind::timeout:
      return "timeout";
    case ErrorKind::config:
      return "configuration error";
    case ErrorKind::io:
      return "i/o error";
  }
  return "error";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace vsql
