#pragma once

#include "fekete/errors.hpp"
#include "fekete/geometry.hpp"
#include "fekete/graph.hpp"
#include "fekete/potential.hpp"
#include "fekete/dynamics.hpp"
#include "fekete/integrate.hpp"
#include "fekete/flows.hpp"
#include "fekete/graphcalc.hpp"
#include "fekete/scenario.hpp"
#include "fekete/builtins.hpp"
