#pragma once

// Umbrella header.

#include "nerharness/analysis.hpp"
#include "nerharness/canonical_json.hpp"
#include "nerharness/corpus.hpp"
#include "nerharness/errors.hpp"
#include "nerharness/experiments.hpp"
#include "nerharness/formats.hpp"
#include "nerharness/iob.hpp"
#include "nerharness/metrics.hpp"
#include "nerharness/random.hpp"
#include "nerharness/release.hpp"
#include "nerharness/rundir.hpp"
#include "nerharness/stats.hpp"
#include "nerharness/tagger.hpp"
#include "nerharness/text.hpp"
