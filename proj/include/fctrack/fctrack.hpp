#pragma once

#include "fctrack/appearance.hpp"
#include "fctrack/assignment.hpp"
#include "fctrack/association.hpp"
#include "fctrack/config.hpp"
#include "fctrack/correction.hpp"
#include "fctrack/evaluation.hpp"
#include "fctrack/geometry.hpp"
#include "fctrack/kalman.hpp"
#include "fctrack/mot_io.hpp"
#include "fctrack/online_tracker.hpp"
#include "fctrack/pipeline.hpp"
#include "fctrack/presets.hpp"
#include "fctrack/rng.hpp"
#include "fctrack/scenario.hpp"
#include "fctrack/scenario_json.hpp"
#include "fctrack/suite.hpp"
#include "fctrack/sweep.hpp"
