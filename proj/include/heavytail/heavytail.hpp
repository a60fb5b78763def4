#pragma once

#include "heavytail/error.hpp"
#include "heavytail/random.hpp"
#include "heavytail/models.hpp"
#include "heavytail/ks.hpp"
#include "heavytail/estimation.hpp"
#include "heavytail/gof.hpp"
#include "heavytail/inequality.hpp"
#include "heavytail/dataset.hpp"
#include "heavytail/html.hpp"
#include "heavytail/ingestion.hpp"
#include "heavytail/http.hpp"
#include "heavytail/report.hpp"
