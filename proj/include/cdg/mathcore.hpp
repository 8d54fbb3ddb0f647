#pragma once

#include "cdg/math/linalg.hpp"
#include "cdg/math/optimize.hpp"
#include "cdg/math/random.hpp"
#include "cdg/math/special.hpp"
