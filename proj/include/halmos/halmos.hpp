#pragma once

#include "halmos/error.hpp"
#include "halmos/numerics.hpp"
#include "halmos/canonical.hpp"
#include "halmos/algebra.hpp"
#include "halmos/pairs.hpp"
#include "halmos/oracle.hpp"
#include "halmos/word.hpp"
