#pragma once

#include "bmu/agents.hpp"
#include "bmu/bmu_ensemble.hpp"
#include "bmu/cartpole.hpp"
#include "bmu/config.hpp"
#include "bmu/discretizer.hpp"
#include "bmu/error.hpp"
#include "bmu/graph_io.hpp"
#include "bmu/graph_metrics.hpp"
#include "bmu/network_stats.hpp"
#include "bmu/qtable.hpp"
#include "bmu/random.hpp"
#include "bmu/run_io.hpp"
#include "bmu/synaptic_graph.hpp"
#include "bmu/synaptic_kernel.hpp"
#include "bmu/trainer.hpp"
