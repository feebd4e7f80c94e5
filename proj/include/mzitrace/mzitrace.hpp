#ifndef MZITRACE_MZITRACE_HPP
#define MZITRACE_MZITRACE_HPP

#include "amplitude.hpp"
#include "barrier.hpp"
#include "errors.hpp"
#include "markers.hpp"
#include "perturbation.hpp"
#include "pointer.hpp"
#include "quadrature.hpp"
#include "report.hpp"
#include "scenario.hpp"

#endif // MZITRACE_MZITRACE_HPP
