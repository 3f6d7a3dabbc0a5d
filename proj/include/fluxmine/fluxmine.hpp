#pragma once

#include "fluxmine/anomaly.hpp"
#include "fluxmine/averaging.hpp"
#include "fluxmine/clustering.hpp"
#include "fluxmine/date.hpp"
#include "fluxmine/distances.hpp"
#include "fluxmine/error.hpp"
#include "fluxmine/ingest.hpp"
#include "fluxmine/parallel.hpp"
#include "fluxmine/representations.hpp"
#include "fluxmine/spaces.hpp"
#include "fluxmine/svg.hpp"
#include "fluxmine/synth.hpp"
#include "fluxmine/validation.hpp"
