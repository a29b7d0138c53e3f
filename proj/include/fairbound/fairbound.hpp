#ifndef FAIRBOUND_FAIRBOUND_HPP
#define FAIRBOUND_FAIRBOUND_HPP

#include "linalg.hpp"
#include "polynomial.hpp"
#include "measure_model.hpp"
#include "evv_engine.hpp"
#include "bound_core.hpp"
#include "refine.hpp"
#include "oracle.hpp"
#include "instance_io.hpp"
#include "report.hpp"

#endif  // FAIRBOUND_FAIRBOUND_HPP
