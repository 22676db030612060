#pragma once

#include "evweight/core.hpp"
#include "evweight/mc.hpp"
#include "evweight/categorical.hpp"
#include "evweight/scalar_opinion.hpp"
#include "evweight/interval_opinion.hpp"
#include "evweight/multi_expert.hpp"
#include "evweight/coin_oracle.hpp"
