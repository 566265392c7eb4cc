#pragma once

#include "decoherence/core.hpp"
#include "decoherence/random.hpp"
#include "decoherence/channels.hpp"
#include "decoherence/integrate.hpp"
#include "decoherence/lindblad.hpp"
#include "decoherence/quadrature.hpp"
#include "decoherence/bath.hpp"
#include "decoherence/grid.hpp"
#include "decoherence/qbm.hpp"
#include "decoherence/wigner.hpp"
#include "decoherence/collisional.hpp"
#include "decoherence/spin_boson.hpp"
#include "decoherence/spin_spin.hpp"
#include "decoherence/pointer.hpp"
#include "decoherence/sieve.hpp"
#include "decoherence/qec.hpp"
#include "decoherence/estimates.hpp"
#include "decoherence/io.hpp"
