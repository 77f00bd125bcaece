#pragma once

#include "oculo/cohort.hpp"
#include "oculo/error.hpp"
#include "oculo/features.hpp"
#include "oculo/pipeline.hpp"
#include "oculo/random.hpp"
#include "oculo/saccade.hpp"
#include "oculo/session_io.hpp"
#include "oculo/signal.hpp"
#include "oculo/synth.hpp"
#include "oculo/types.hpp"
