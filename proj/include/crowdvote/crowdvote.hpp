#pragma once

#include "crowdvote/bayes.hpp"
#include "crowdvote/likelihood.hpp"
#include "crowdvote/minimax.hpp"
#include "crowdvote/model.hpp"
#include "crowdvote/risk.hpp"
