#include "klsens/enumeration.hpp"

namespace klsens {

std::size_t path_count_checked(std::size_t n, int depth, std::size_t budget,
                               const std::string& what) {
  require(depth >= 1, ErrorKind::validation, "enumeration depth must be at least 1");
  std::size_t count = 1;
  for (int t = 0; t < depth; ++t) {
    require(count <= budget / n, ErrorKind::budget,
            what + " exceeds the " + std::to_string(budget) + "-state budget");
    count *= n;
  }
  return count;
}

}  // namespace klsens
