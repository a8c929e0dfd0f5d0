#pragma once

// Umbrella header pulling in the whole toolkit.

#include "offlang/adam.hpp"
#include "offlang/balance.hpp"
#include "offlang/checkpoint.hpp"
#include "offlang/corpus.hpp"
#include "offlang/errors.hpp"
#include "offlang/eval.hpp"
#include "offlang/io.hpp"
#include "offlang/labels.hpp"
#include "offlang/loss.hpp"
#include "offlang/matrix.hpp"
#include "offlang/model.hpp"
#include "offlang/network.hpp"
#include "offlang/preprocess.hpp"
#include "offlang/rng.hpp"
#include "offlang/train.hpp"
#include "offlang/unicode.hpp"
#include "offlang/vocab.hpp"
