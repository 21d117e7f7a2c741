#pragma once

#include "lerf/core.hpp"
#include "lerf/group.hpp"
#include "lerf/stallings.hpp"
#include "lerf/encoding.hpp"
#include "lerf/action.hpp"
#include "lerf/chabauty.hpp"
#include "lerf/approximation.hpp"
#include "lerf/amenability.hpp"
#include "lerf/genericity.hpp"
#include "lerf/serialize.hpp"
