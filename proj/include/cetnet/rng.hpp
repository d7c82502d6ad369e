#pragma once

#include <random>

namespace cetnet {

using Rng = std::mt19937_64;

}  // namespace cetnet
