#pragma once

// Umbrella header.
#include "vsl/capacity_model.hpp"
#include "vsl/commands.hpp"
#include "vsl/dataset.hpp"
#include "vsl/errors.hpp"
#include "vsl/nelder_mead.hpp"
#include "vsl/normal.hpp"
#include "vsl/observer.hpp"
#include "vsl/png.hpp"
#include "vsl/psychometrics.hpp"
#include "vsl/records.hpp"
#include "vsl/report.hpp"
#include "vsl/rng.hpp"
#include "vsl/stimulus.hpp"
