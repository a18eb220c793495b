#pragma once

/// Umbrella header for the SLDG Vlasov-Poisson library.

#include "sldg/basis.hpp"
#include "sldg/driver.hpp"
#include "sldg/field.hpp"
#include "sldg/pencil.hpp"
#include "sldg/sldg1d.hpp"
#include "sldg/tensor.hpp"
#include "sldg/vmesh.hpp"
#include "sldg/vsweep.hpp"
#include "sldg/xfield.hpp"
