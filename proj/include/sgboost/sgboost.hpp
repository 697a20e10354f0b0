#pragma once

#include "sgboost/boosting.hpp"
#include "sgboost/csv.hpp"
#include "sgboost/design.hpp"
#include "sgboost/error.hpp"
#include "sgboost/evaluation.hpp"
#include "sgboost/ridge.hpp"
#include "sgboost/rng.hpp"
#include "sgboost/selection_theory.hpp"
#include "sgboost/simulation.hpp"
#include "sgboost/special.hpp"
