#pragma once

#include "dispo/error.hpp"
#include "dispo/rational.hpp"
#include "dispo/types.hpp"
#include "dispo/csv.hpp"
#include "dispo/ingest.hpp"
#include "dispo/dataset.hpp"
#include "dispo/prices.hpp"
#include "dispo/ledger.hpp"
#include "dispo/metrics.hpp"
#include "dispo/engine.hpp"
#include "dispo/aggregate.hpp"
#include "dispo/stats.hpp"
#include "dispo/compare.hpp"
#include "dispo/synth.hpp"
