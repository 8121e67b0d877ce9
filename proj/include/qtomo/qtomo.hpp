#pragma once

// Everything in one include.

#include "qtomo/dualbasis.hpp"
#include "qtomo/errors.hpp"
#include "qtomo/estimators/config.hpp"
#include "qtomo/estimators/glauber.hpp"
#include "qtomo/estimators/homodyne.hpp"
#include "qtomo/estimators/kerr.hpp"
#include "qtomo/estimators/nonunitary.hpp"
#include "qtomo/estimators/parity.hpp"
#include "qtomo/estimators/spin.hpp"
#include "qtomo/frames.hpp"
#include "qtomo/io.hpp"
#include "qtomo/oscore.hpp"
#include "qtomo/parallel.hpp"
#include "qtomo/quorums.hpp"
#include "qtomo/recon.hpp"
#include "qtomo/records.hpp"
#include "qtomo/rng.hpp"
#include "qtomo/sampler.hpp"
#include "qtomo/special.hpp"
#include "qtomo/stats.hpp"
