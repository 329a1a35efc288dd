#pragma once

#include "ctia_ipc/adc.hpp"
#include "ctia_ipc/array_core.hpp"
#include "ctia_ipc/bayer_frame.hpp"
#include "ctia_ipc/config.hpp"
#include "ctia_ipc/device_model.hpp"
#include "ctia_ipc/error.hpp"
#include "ctia_ipc/golden.hpp"
#include "ctia_ipc/io.hpp"
#include "ctia_ipc/layer_mapper.hpp"
#include "ctia_ipc/metrics.hpp"
#include "ctia_ipc/monte_carlo.hpp"
#include "ctia_ipc/parallel.hpp"
#include "ctia_ipc/runner.hpp"
#include "ctia_ipc/simulator.hpp"
#include "ctia_ipc/sweep.hpp"
#include "ctia_ipc/synthetic.hpp"
#include "ctia_ipc/wtc.hpp"
