#pragma once

#include "logsym/errors.hpp"
#include "logsym/special.hpp"
#include "logsym/kernels.hpp"
#include "logsym/model.hpp"
#include "logsym/theory.hpp"
#include "logsym/estimation.hpp"
#include "logsym/diagnostics.hpp"
#include "logsym/simulation.hpp"
#include "logsym/io.hpp"
#include "logsym/report.hpp"
