#pragma once

#include <doctest.h>

#include "cbf/error.hpp"

// Checks that `expr` throws cbf::Error with the given code.
#define CHECK_ERRC(expr, errc)                                   \
    do {                                                         \
        bool thrown_ = false;                                    \
        try {                                                    \
            (void)(expr);                                        \
        } catch (const cbf::Error& e_) {                         \
            thrown_ = true;                                      \
            CHECK_MESSAGE(e_.code() == (errc), e_.what());       \
        }                                                        \
        CHECK_MESSAGE(thrown_, "expected " #errc);               \
    } while (0)
