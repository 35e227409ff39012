#pragma once

#include "cmmi/matrix.hpp"
#include "cmmi/numerics.hpp"
#include "cmmi/system.hpp"
#include "cmmi/rank_detect.hpp"
#include "cmmi/estimators.hpp"
#include "cmmi/beamform.hpp"
#include "cmmi/experiment.hpp"
#include "cmmi/io.hpp"
