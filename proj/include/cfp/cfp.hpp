#pragma once

#include "cfp/basis.hpp"
#include "cfp/design.hpp"
#include "cfp/elliptic.hpp"
#include "cfp/error.hpp"
#include "cfp/lsq.hpp"
#include "cfp/multiindex.hpp"
#include "cfp/orthopoly.hpp"
#include "cfp/random.hpp"
#include "cfp/study.hpp"
