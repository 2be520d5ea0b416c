#pragma once

#include "citegrav/assignment.hpp"
#include "citegrav/country.hpp"
#include "citegrav/csv.hpp"
#include "citegrav/error.hpp"
#include "citegrav/flows.hpp"
#include "citegrav/gazetteer.hpp"
#include "citegrav/geo.hpp"
#include "citegrav/gravity.hpp"
#include "citegrav/ingest.hpp"
#include "citegrav/normalize.hpp"
#include "citegrav/records.hpp"
#include "citegrav/run_config.hpp"
#include "citegrav/synth.hpp"
