#pragma once

#include "hstm/anonymize.hpp"
#include "hstm/core.hpp"
#include "hstm/distributions.hpp"
#include "hstm/filter.hpp"
#include "hstm/io.hpp"
#include "hstm/quantities.hpp"
#include "hstm/scaling.hpp"
#include "hstm/table_io.hpp"
#include "hstm/topologies.hpp"
#include "hstm/traffic_matrix.hpp"
#include "hstm/windowing.hpp"
