#pragma once

#include "groupoid/error.hpp"
#include "groupoid/core.hpp"
#include "groupoid/group.hpp"
#include "groupoid/random.hpp"
#include "groupoid/semidirect.hpp"
#include "groupoid/convolution.hpp"
#include "groupoid/linalg.hpp"
#include "groupoid/representation.hpp"
#include "groupoid/gauge.hpp"
#include "groupoid/fixtures.hpp"
