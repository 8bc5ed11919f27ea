#pragma once

#include "chpca/types.hpp"
#include "chpca/random.hpp"
#include "chpca/parallel.hpp"
#include "chpca/ingest.hpp"
#include "chpca/preprocess.hpp"
#include "chpca/hilbert.hpp"
#include "chpca/spectrum.hpp"
#include "chpca/interpret.hpp"
#include "chpca/synth.hpp"
#include "chpca/io.hpp"
