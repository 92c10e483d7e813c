#pragma once

#include "tunnelpath/numerics.hpp"
#include "tunnelpath/phase.hpp"
#include "tunnelpath/probabilities.hpp"
#include "tunnelpath/quasiclassical.hpp"
#include "tunnelpath/scattering.hpp"
#include "tunnelpath/version.hpp"
#include "tunnelpath/wavepacket.hpp"
#include "tunnelpath/wkb.hpp"
