#pragma once

#include "errors.hpp"
#include "matrix.hpp"
#include "numkernel.hpp"
#include "spectra.hpp"
#include "dynamics.hpp"
#include "mechanisms.hpp"
#include "efficiency.hpp"
#include "ingest.hpp"
#include "parallel.hpp"
#include "report.hpp"
