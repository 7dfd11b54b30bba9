#pragma once

// Umbrella header for the design-space exploration library.

#include "sramdse/workload.hpp"
#include "sramdse/dataflow.hpp"
#include "sramdse/memory.hpp"
#include "sramdse/energy.hpp"
#include "sramdse/analysis.hpp"
#include "sramdse/config.hpp"
#include "sramdse/sweep.hpp"
#include "sramdse/report.hpp"
#include "sramdse/calibrate.hpp"
