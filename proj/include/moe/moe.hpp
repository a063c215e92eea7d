#pragma once

#include "moe/errors.hpp"
#include "moe/linalg.hpp"
#include "moe/random.hpp"
#include "moe/phi.hpp"
#include "moe/channel.hpp"
#include "moe/entropy.hpp"
#include "moe/reduction.hpp"
#include "moe/parallel.hpp"
#include "moe/sphere.hpp"
#include "moe/certification.hpp"
#include "moe/holevo.hpp"
#include "moe/channel_io.hpp"
#include "moe/report_json.hpp"
