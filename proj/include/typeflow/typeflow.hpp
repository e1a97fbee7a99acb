#pragma once

#include "typeflow/errors.hpp"
#include "typeflow/probcore.hpp"
#include "typeflow/lp.hpp"
#include "typeflow/parallel.hpp"
#include "typeflow/typegraph.hpp"
#include "typeflow/singleletter.hpp"
#include "typeflow/coupling.hpp"
#include "typeflow/dsbs.hpp"
#include "typeflow/hyper.hpp"
#include "typeflow/exchange.hpp"
#include "typeflow/io.hpp"
