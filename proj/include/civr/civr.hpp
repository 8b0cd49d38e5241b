#pragma once

#include "civr/core.hpp"
#include "civr/rng.hpp"
#include "civr/oracle.hpp"
#include "civr/constants.hpp"
#include "civr/prox.hpp"
#include "civr/composite.hpp"
#include "civr/estimator.hpp"
#include "civr/schedule.hpp"
#include "civr/solver.hpp"
#include "civr/apps/portfolio.hpp"
#include "civr/apps/mdp.hpp"
#include "civr/apps/synthetic.hpp"
