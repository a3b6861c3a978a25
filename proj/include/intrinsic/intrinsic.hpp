#pragma once

#include "config.hpp"
#include "csv.hpp"
#include "dc_engine.hpp"
#include "error.hpp"
#include "info.hpp"
#include "markov.hpp"
#include "mc_oracle.hpp"
#include "network.hpp"
#include "random.hpp"
#include "scale_select.hpp"
#include "stats.hpp"
#include "ticks.hpp"
#include "verification.hpp"
