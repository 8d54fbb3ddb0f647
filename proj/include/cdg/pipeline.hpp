#pragma once

#include "cdg/mathcore.hpp"
#include "cdg/data.hpp"
#include "cdg/garch.hpp"
#include "cdg/dcc.hpp"
#include "cdg/copula.hpp"
#include "cdg/gof.hpp"
#include "cdg/risk.hpp"
#include "cdg/pipeline/config.hpp"
#include "cdg/pipeline/report.hpp"
#include "cdg/pipeline/serialize.hpp"
#include "cdg/pipeline/manifest.hpp"
#include "cdg/pipeline/synth.hpp"
#include "cdg/pipeline/commands.hpp"
