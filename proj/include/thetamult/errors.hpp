#pragma once

#include <stdexcept>
#include <string>

namespace thetamult {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --- period matrix validation ---
class NotSymmetricError : public Error { public: using Error::Error; };
class NotPositiveError : public Error { public: using Error::Error; };

// --- lattice / group bookkeeping ---
class LatticeMembershipError : public Error { public: using Error::Error; };
class SizeLimitError : public Error { public: using Error::Error; };
class NotHalvableError : public Error { public: using Error::Error; };
class InjectivityOfPsiFailedError : public Error { public: using Error::Error; };

// --- theta evaluation ---
class NearDegenerateError : public Error { public: using Error::Error; };

// --- section bases ---
class DegenerateSamplingError : public Error { public: using Error::Error; };

// --- multiplication map ---
class IllConditionedError : public Error { public: using Error::Error; };
class ResidualTooLargeError : public Error { public: using Error::Error; };
class BlockLeakError : public Error { public: using Error::Error; };
class VerdictMismatchError : public Error { public: using Error::Error; };
class EmptyKernelError : public Error { public: using Error::Error; };
class SpanMismatchError : public Error { public: using Error::Error; };

} // namespace thetamult
