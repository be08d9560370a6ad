#ifndef WBIDF_WBIDF_HPP
#define WBIDF_WBIDF_HPP

#include "wbidf/corpus.hpp"
#include "wbidf/error.hpp"
#include "wbidf/eval.hpp"
#include "wbidf/filter.hpp"
#include "wbidf/lda.hpp"
#include "wbidf/model_io.hpp"
#include "wbidf/pipeline.hpp"
#include "wbidf/rng.hpp"
#include "wbidf/synthetic.hpp"

#endif  // WBIDF_WBIDF_HPP
