#pragma once

#include "tabver/checkpoint.hpp"
#include "tabver/config.hpp"
#include "tabver/dataset.hpp"
#include "tabver/encoder.hpp"
#include "tabver/evidence.hpp"
#include "tabver/executor.hpp"
#include "tabver/graph.hpp"
#include "tabver/pipeline.hpp"
#include "tabver/program.hpp"
#include "tabver/synth.hpp"
#include "tabver/synthetic.hpp"
#include "tabver/table.hpp"
#include "tabver/training.hpp"
#include "tabver/verifier.hpp"
