#pragma once

#include "fdi/errors.hpp"
#include "fdi/numerics.hpp"
#include "fdi/lp.hpp"
#include "fdi/agc_model.hpp"
#include "fdi/discretization.hpp"
#include "fdi/dae.hpp"
#include "fdi/attack_space.hpp"
#include "fdi/filter_design.hpp"
#include "fdi/residual.hpp"
#include "fdi/simulator.hpp"
#include "fdi/trace_io.hpp"
#include "fdi/defaults.hpp"
#include "fdi/pipeline.hpp"
#include "fdi/config.hpp"
#include "fdi/session.hpp"
