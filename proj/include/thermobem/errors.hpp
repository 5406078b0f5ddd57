#pragma once

#include <stdexcept>
#include <string>

namespace thermobem {

#define THERMOBEM_ERROR(Name)                                  \
    struct Name : std::runtime_error {                        \
        explicit Name(const std::string& what)                \
            : std::runtime_error(std::string(#Name ": ") + what) {} \
    }

THERMOBEM_ERROR(ConstraintViolation);
THERMOBEM_ERROR(DomainError);
THERMOBEM_ERROR(ConfluentRoots);
THERMOBEM_ERROR(BranchError);
THERMOBEM_ERROR(CoincidentPoints);
THERMOBEM_ERROR(MissingNormal);
THERMOBEM_ERROR(BadNormal);
THERMOBEM_ERROR(BadResolution);
THERMOBEM_ERROR(TagMismatch);
THERMOBEM_ERROR(SingularMatrix);
THERMOBEM_ERROR(PointTooClose);
THERMOBEM_ERROR(ExtrapolationDiverged);
THERMOBEM_ERROR(AssemblyOverflow);
THERMOBEM_ERROR(QuadratureInsufficient);
THERMOBEM_ERROR(SymbolEvaluationFailed);
THERMOBEM_ERROR(UsageError);

#undef THERMOBEM_ERROR

} // namespace thermobem
