#pragma once

#include <stdexcept>
#include <string>

namespace sandpile {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define SANDPILE_DEFINE_ERROR(Name)          \
    struct Name : Error {                    \
        using Error::Error;                  \
    }

SANDPILE_DEFINE_ERROR(ParseError);
SANDPILE_DEFINE_ERROR(InvalidTopplingVector);
SANDPILE_DEFINE_ERROR(ProbabilitiesDoNotSumToOne);
SANDPILE_DEFINE_ERROR(DuplicateSupportVector);
SANDPILE_DEFINE_ERROR(EmptySupport);
SANDPILE_DEFINE_ERROR(InvalidConfiguration);
SANDPILE_DEFINE_ERROR(SiteNotUnstable);
SANDPILE_DEFINE_ERROR(ExplicitDeckExhausted);
SANDPILE_DEFINE_ERROR(FuelExhausted);
SANDPILE_DEFINE_ERROR(StateSpaceTooLarge);
SANDPILE_DEFINE_ERROR(SingularMatrix);
SANDPILE_DEFINE_ERROR(SingularSystem);
SANDPILE_DEFINE_ERROR(RecurrentClassMismatch);
SANDPILE_DEFINE_ERROR(DimensionMismatch);
SANDPILE_DEFINE_ERROR(InvalidRouting);
SANDPILE_DEFINE_ERROR(NullTopplingNotRepresentable);
SANDPILE_DEFINE_ERROR(InvalidPreset);

#undef SANDPILE_DEFINE_ERROR

} // namespace sandpile
