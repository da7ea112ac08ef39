#pragma once

// Everything except the command-line layer.

#include "besov/error.hpp"
#include "besov/fft.hpp"
#include "besov/functions.hpp"
#include "besov/grid.hpp"
#include "besov/io.hpp"
#include "besov/kernels.hpp"
#include "besov/littlewood_paley.hpp"
#include "besov/parallel.hpp"
#include "besov/rate.hpp"
#include "besov/report.hpp"
#include "besov/verify.hpp"
