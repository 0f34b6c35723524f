#pragma once

#include "marl/nn/adam.hpp"
#include "marl/nn/mlp.hpp"
#include "marl/nn/serialize.hpp"
#include "marl/nn/soft_update.hpp"
#include "marl/nn/squashed_gaussian.hpp"
