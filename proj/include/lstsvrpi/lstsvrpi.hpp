#pragma once

#include "lstsvrpi/bounds.hpp"
#include "lstsvrpi/dataset.hpp"
#include "lstsvrpi/error.hpp"
#include "lstsvrpi/kernel.hpp"
#include "lstsvrpi/linalg.hpp"
#include "lstsvrpi/metrics.hpp"
#include "lstsvrpi/model.hpp"
#include "lstsvrpi/model_io.hpp"
#include "lstsvrpi/oracle.hpp"
#include "lstsvrpi/pipeline.hpp"
#include "lstsvrpi/stats.hpp"
#include "lstsvrpi/tuning.hpp"
