#pragma once

#include "site/error.hpp"
#include "site/feature_store.hpp"
#include "site/rank_stats.hpp"
#include "site/metrics.hpp"
#include "site/diagnostics.hpp"
#include "site/report.hpp"
#include "site/commands.hpp"
