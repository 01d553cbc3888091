#pragma once

#include <hcf/examples.hpp>
