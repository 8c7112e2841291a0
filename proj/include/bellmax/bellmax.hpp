#pragma once

#include "bellmax/errors.hpp"
#include "bellmax/qlinalg.hpp"
#include "bellmax/bellops.hpp"
#include "bellmax/anneal.hpp"
#include "bellmax/oracles.hpp"
#include "bellmax/bench.hpp"
#include "bellmax/io.hpp"
