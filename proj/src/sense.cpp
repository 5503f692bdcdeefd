#include "klsens/sense.hpp"

#include "klsens/errors.hpp"

namespace klsens {

const char* to_string(Sense s) {
  switch (s) {
    case Sense::max: return "max";
    case Sense::min: return "min";
    case Sense::both: return "both";
  }
  return "unknown";
}

Sense sense_from_string(const std::string& s) {
  if (s == "max") return Sense::max;
  if (s == "min") return Sense::min;
  if (s == "both") return Sense::both;
  fail(ErrorKind::validation, "unknown sense '" + s + "' (expected max, min or both)");
}

}  // namespace klsens
