#pragma once

#include "reftrie/core.hpp"
#include "reftrie/distance.hpp"
#include "reftrie/engine.hpp"
#include "reftrie/grid.hpp"
#include "reftrie/index_io.hpp"
#include "reftrie/partition.hpp"
#include "reftrie/search.hpp"
#include "reftrie/succinct.hpp"
#include "reftrie/synth.hpp"
#include "reftrie/textio.hpp"
#include "reftrie/trie.hpp"
#include "reftrie/zorder.hpp"
