#pragma once

#include "wildfire/autodiff.hpp"
#include "wildfire/config.hpp"
#include "wildfire/dataset.hpp"
#include "wildfire/error.hpp"
#include "wildfire/fdsolver.hpp"
#include "wildfire/harness.hpp"
#include "wildfire/jet.hpp"
#include "wildfire/model.hpp"
#include "wildfire/net.hpp"
#include "wildfire/optim.hpp"
#include "wildfire/pinn.hpp"
#include "wildfire/stochastic.hpp"
#include "wildfire/train.hpp"
