#pragma once

#include "strcf/config.hpp"
#include "strcf/error.hpp"
#include "strcf/eval.hpp"
#include "strcf/features.hpp"
#include "strcf/fft.hpp"
#include "strcf/grid.hpp"
#include "strcf/image.hpp"
#include "strcf/image_io.hpp"
#include "strcf/report.hpp"
#include "strcf/snapshot.hpp"
#include "strcf/solver.hpp"
#include "strcf/synth.hpp"
#include "strcf/tracker.hpp"
