#pragma once

#include "lps/adversary.hpp"
#include "lps/common.hpp"
#include "lps/core.hpp"
#include "lps/harness.hpp"
#include "lps/hashing.hpp"
#include "lps/io.hpp"
#include "lps/routing.hpp"
#include "lps/schedulers.hpp"
#include "lps/trace.hpp"
#include "lps/verification.hpp"
