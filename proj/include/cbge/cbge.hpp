#pragma once

#include "cbge/core/common.hpp"
#include "cbge/core/indexing.hpp"
#include "cbge/core/economy.hpp"
#include "cbge/core/io_algebra.hpp"
#include "cbge/core/steady_state.hpp"
#include "cbge/calib/tables.hpp"
#include "cbge/calib/ingest.hpp"
#include "cbge/calib/baseline.hpp"
#include "cbge/policy/scenario.hpp"
#include "cbge/policy/scenario_io.hpp"
#include "cbge/policy/solver.hpp"
#include "cbge/policy/endogenous_gap.hpp"
#include "cbge/metrics/emissions.hpp"
#include "cbge/metrics/trade.hpp"
#include "cbge/metrics/welfare.hpp"
#include "cbge/linearize/comparative_statics.hpp"
#include "cbge/cf/sweeps.hpp"
#include "cbge/runner/artifacts.hpp"
#include "cbge/runner/suite.hpp"
#include "cbge/fixtures.hpp"
