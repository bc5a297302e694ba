#pragma once

#include "channel.hpp"
#include "code.hpp"
#include "errors.hpp"
#include "interrogator.hpp"
#include "medium.hpp"
#include "metrics.hpp"
#include "mote.hpp"
#include "piezo.hpp"
#include "rng.hpp"
#include "runner.hpp"
#include "scenario.hpp"
#include "units.hpp"
#include "waveform.hpp"
