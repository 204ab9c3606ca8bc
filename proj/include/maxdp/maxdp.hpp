#pragma once

#include "maxdp/env.hpp"
#include "maxdp/experiments.hpp"
#include "maxdp/fixtures.hpp"
#include "maxdp/gold_mining.hpp"
#include "maxdp/learners.hpp"
#include "maxdp/mdp.hpp"
#include "maxdp/operators.hpp"
#include "maxdp/oracle.hpp"
