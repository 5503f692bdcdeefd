#pragma once

#include <string>

namespace klsens {

/// Direction of the worst-case optimization over the KL ball.
enum class Sense { max, min, both };

const char* to_string(Sense s);
Sense sense_from_string(const std::string& s);

}  // namespace klsens
