#pragma once

#include "obsplan/belief.hpp"
#include "obsplan/errors.hpp"
#include "obsplan/exactplan.hpp"
#include "obsplan/gen.hpp"
#include "obsplan/lab.hpp"
#include "obsplan/model.hpp"
#include "obsplan/observability.hpp"
#include "obsplan/policy.hpp"
#include "obsplan/rng.hpp"
#include "obsplan/simplex.hpp"
#include "obsplan/smp.hpp"
