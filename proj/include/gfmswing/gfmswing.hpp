#pragma once

// Umbrella header.
#include "gfmswing/analysis/cct.hpp"
#include "gfmswing/analysis/classify.hpp"
#include "gfmswing/analysis/curves.hpp"
#include "gfmswing/core/error.hpp"
#include "gfmswing/core/network_params.hpp"
#include "gfmswing/core/per_unit.hpp"
#include "gfmswing/core/phasor.hpp"
#include "gfmswing/engine/simulate.hpp"
#include "gfmswing/io/number.hpp"
#include "gfmswing/io/scenario_yaml.hpp"
#include "gfmswing/io/summary.hpp"
#include "gfmswing/io/svg.hpp"
#include "gfmswing/io/trace_csv.hpp"
#include "gfmswing/machines/gfm.hpp"
#include "gfmswing/machines/limiter.hpp"
#include "gfmswing/machines/sg.hpp"
#include "gfmswing/network/nodal.hpp"
#include "gfmswing/network/stage.hpp"
#include "gfmswing/network/wscc9.hpp"
#include "gfmswing/relay/blinders.hpp"
#include "gfmswing/relay/logic.hpp"
#include "gfmswing/run.hpp"
#include "gfmswing/scenario.hpp"
