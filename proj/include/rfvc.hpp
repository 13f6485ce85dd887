#pragma once

// Convenience header pulling in the whole library.

#include "rfvc/config.hpp"
#include "rfvc/csv.hpp"
#include "rfvc/detector.hpp"
#include "rfvc/error.hpp"
#include "rfvc/eval.hpp"
#include "rfvc/export.hpp"
#include "rfvc/features.hpp"
#include "rfvc/forest.hpp"
#include "rfvc/importance.hpp"
#include "rfvc/model.hpp"
#include "rfvc/model_io.hpp"
#include "rfvc/parallel.hpp"
#include "rfvc/report.hpp"
#include "rfvc/reproduce.hpp"
#include "rfvc/rng.hpp"
#include "rfvc/simulator.hpp"
#include "rfvc/svm.hpp"
#include "rfvc/topology.hpp"
#include "rfvc/trace.hpp"
