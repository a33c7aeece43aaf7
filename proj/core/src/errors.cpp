#include "kepreg/errors.hpp"
