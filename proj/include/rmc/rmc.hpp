// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rmc/box.hpp"
#include "rmc/errors.hpp"
#include "rmc/expression.hpp"
#include "rmc/integrator.hpp"
#include "rmc/io.hpp"
#include "rmc/model.hpp"
#include "rmc/parallel.hpp"
#include "rmc/random.hpp"
#include "rmc/samplers.hpp"
#include "rmc/stats.hpp"
