#pragma once

#include "mfg_seird/error.hpp"
#include "mfg_seird/io.hpp"
#include "mfg_seird/mfg/fixed_point.hpp"
#include "mfg_seird/mfg/fokker_planck.hpp"
#include "mfg_seird/mfg/hamiltonian.hpp"
#include "mfg_seird/mfg/hjb.hpp"
#include "mfg_seird/scenario/config.hpp"
#include "mfg_seird/scenario/pipeline.hpp"
#include "mfg_seird/seird/model.hpp"
#include "mfg_seird/seird/simulate.hpp"
#include "mfg_seird/torus.hpp"
