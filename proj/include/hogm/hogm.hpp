#ifndef HOGM_HOGM_HPP
#define HOGM_HOGM_HPP

#include "hogm/algebra.hpp"
#include "hogm/bundle.hpp"
#include "hogm/core.hpp"
#include "hogm/euler_poincare.hpp"
#include "hogm/integrate.hpp"
#include "hogm/models.hpp"
#include "hogm/ostrogradsky.hpp"
#include "hogm/shooting.hpp"

#endif  // HOGM_HOGM_HPP
