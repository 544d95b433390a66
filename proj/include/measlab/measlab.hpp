// Umbrella header.
#pragma once

#include "measlab/linalg.hpp"
#include "measlab/metrics.hpp"
#include "measlab/model.hpp"
#include "measlab/nogo.hpp"
#include "measlab/optimizer.hpp"
#include "measlab/random.hpp"
#include "measlab/scenario.hpp"
