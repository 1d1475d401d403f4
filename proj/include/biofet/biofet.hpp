#pragma once

#include "biofet/channel.hpp"
#include "biofet/config.hpp"
#include "biofet/constants.hpp"
#include "biofet/detection.hpp"
#include "biofet/estimation.hpp"
#include "biofet/harness.hpp"
#include "biofet/kinetics.hpp"
#include "biofet/params.hpp"
#include "biofet/quadrature.hpp"
#include "biofet/rng.hpp"
#include "biofet/spectral.hpp"
#include "biofet/version.hpp"
