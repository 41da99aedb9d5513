#pragma once

// Umbrella header: zeroth-order topology of neural-network layers
// (maximum spanning forests, persistence diagrams, neural persistence),
// critical compression ratios, MST/top-alpha overlap bounds, pruning
// masks, and a desk-scale dense trainer to drive iterative loops.

#include "topoprune/arch_json.hpp"
#include "topoprune/bipartite.hpp"
#include "topoprune/bounds.hpp"
#include "topoprune/checkpoint.hpp"
#include "topoprune/compression.hpp"
#include "topoprune/dataset.hpp"
#include "topoprune/error.hpp"
#include "topoprune/iterative.hpp"
#include "topoprune/layer.hpp"
#include "topoprune/monte_carlo.hpp"
#include "topoprune/npy.hpp"
#include "topoprune/persistence.hpp"
#include "topoprune/pruning.hpp"
#include "topoprune/reports.hpp"
#include "topoprune/rng.hpp"
#include "topoprune/sha256.hpp"
#include "topoprune/spanning.hpp"
#include "topoprune/trainer.hpp"
#include "topoprune/union_find.hpp"
#include "topoprune/version.hpp"
