#pragma once

#include "subsidy_game/artifacts.hpp"
#include "subsidy_game/dynamics.hpp"
#include "subsidy_game/equilibrium.hpp"
#include "subsidy_game/error.hpp"
#include "subsidy_game/model.hpp"
#include "subsidy_game/riccati.hpp"
#include "subsidy_game/runner.hpp"
#include "subsidy_game/scenario.hpp"
