#pragma once

#include "markovcat/core/category.hpp"
#include "markovcat/core/errors.hpp"
#include "markovcat/core/object.hpp"
#include "markovcat/filterchain.hpp"
#include "markovcat/filtering.hpp"
#include "markovcat/finite/finsetmulti.hpp"
#include "markovcat/finite/finstoch.hpp"
#include "markovcat/finite/independence.hpp"
#include "markovcat/gauss/gauss.hpp"
#include "markovcat/laws.hpp"
#include "markovcat/models.hpp"
#include "markovcat/simulate.hpp"
#include "markovcat/smoothing.hpp"
