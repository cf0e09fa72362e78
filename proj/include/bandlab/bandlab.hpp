#pragma once

#include "bandlab/error.hpp"
#include "bandlab/entropy.hpp"
#include "bandlab/numerics.hpp"
#include "bandlab/model.hpp"
#include "bandlab/transfer.hpp"
#include "bandlab/spectra.hpp"
#include "bandlab/mde.hpp"
#include "bandlab/io.hpp"
#include "bandlab/harness.hpp"
