#pragma once

#include "attention.hpp"
#include "corpus.hpp"
#include "diagnostics.hpp"
#include "dynamics.hpp"
#include "encodings.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "matrix.hpp"
#include "reporting.hpp"
#include "rng.hpp"
