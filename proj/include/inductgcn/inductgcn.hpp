#pragma once

#include "inductgcn/checkpoint.hpp"
#include "inductgcn/corpus.hpp"
#include "inductgcn/error.hpp"
#include "inductgcn/features.hpp"
#include "inductgcn/graph.hpp"
#include "inductgcn/harness.hpp"
#include "inductgcn/inference.hpp"
#include "inductgcn/model.hpp"
#include "inductgcn/rng.hpp"
#include "inductgcn/sparse.hpp"
#include "inductgcn/synthetic.hpp"
#include "inductgcn/vocabulary.hpp"
