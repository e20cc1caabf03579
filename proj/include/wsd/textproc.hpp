#pragma once

// Text processing: tokenization, stemming, and the sparse feature families.

#include "wsd/features.hpp"
#include "wsd/porter.hpp"
#include "wsd/tokenize.hpp"
