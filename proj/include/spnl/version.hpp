#pragma once

#define SPNL_VERSION_MAJOR 0
#define SPNL_VERSION_MINOR 1
#define SPNL_VERSION_PATCH 0
#define SPNL_VERSION "0.1.0"
