#pragma once

#include "dpat/automaton.hpp"
#include "dpat/classify.hpp"
#include "dpat/field.hpp"
#include "dpat/generate.hpp"
#include "dpat/parallel.hpp"
#include "dpat/patterns.hpp"
#include "dpat/rng.hpp"
#include "dpat/scheme_file.hpp"
#include "dpat/store.hpp"
#include "dpat/sweep.hpp"
#include "dpat/union_find.hpp"
