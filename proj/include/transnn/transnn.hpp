#pragma once

#include "transnn/types.hpp"
#include "transnn/activations.hpp"
#include "transnn/network.hpp"
#include "transnn/network_io.hpp"
#include "transnn/dynamics.hpp"
#include "transnn/analysis.hpp"
#include "transnn/continuum.hpp"
#include "transnn/continuum_io.hpp"
#include "transnn/learn/model.hpp"
#include "transnn/learn/train.hpp"
#include "transnn/learn/universal.hpp"
#include "transnn/learn/datasets.hpp"
#include "transnn/learn/checkpoint.hpp"
#include "transnn/learn/experiment.hpp"
