#pragma once

#include "marc/channel.hpp"
#include "marc/error.hpp"
#include "marc/experiment.hpp"
#include "marc/joint_relaying.hpp"
#include "marc/matrix_core.hpp"
#include "marc/oracles.hpp"
#include "marc/parallel.hpp"
#include "marc/random.hpp"
#include "marc/relay_rate.hpp"
#include "marc/tdma_relaying.hpp"
