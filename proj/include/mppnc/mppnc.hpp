#pragma once

#include "mppnc/baselines.hpp"
#include "mppnc/channel.hpp"
#include "mppnc/decoder_bp.hpp"
#include "mppnc/errors.hpp"
#include "mppnc/frontend.hpp"
#include "mppnc/harness.hpp"
#include "mppnc/modem.hpp"
#include "mppnc/rng.hpp"
