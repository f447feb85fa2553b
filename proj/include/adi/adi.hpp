#pragma once

#include "adi/arbitration.hpp"
#include "adi/faults.hpp"
#include "adi/harness.hpp"
#include "adi/noise.hpp"
#include "adi/nominal_channel.hpp"
#include "adi/perception.hpp"
#include "adi/platform.hpp"
#include "adi/risk.hpp"
#include "adi/risk_oracle.hpp"
#include "adi/scenario.hpp"
#include "adi/sim_core.hpp"
#include "adi/supervisor_channel.hpp"
