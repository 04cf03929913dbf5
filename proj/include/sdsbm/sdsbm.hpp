#pragma once

#include "sdsbm/em.hpp"
#include "sdsbm/error.hpp"
#include "sdsbm/experiments.hpp"
#include "sdsbm/fit_io.hpp"
#include "sdsbm/kalman.hpp"
#include "sdsbm/network.hpp"
#include "sdsbm/network_io.hpp"
#include "sdsbm/rng.hpp"
#include "sdsbm/seasonal.hpp"
