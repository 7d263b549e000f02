#pragma once

#include "notc/genome.hpp"
#include "notc/learner.hpp"
#include "notc/mountain_car.hpp"
#include "notc/novelty_map.hpp"
#include "notc/population.hpp"
#include "notc/experiment.hpp"
