#pragma once

#include <stdexcept>
#include <string>

namespace occusense {

// Base class for every error this library raises on a contract violation.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// acoustics
struct MaterialNotFound : Error { using Error::Error; };
struct InvalidFrequency : Error { using Error::Error; };
struct InvalidTable : Error { using Error::Error; };
struct InvalidGeometry : Error { using Error::Error; };
struct EmptySurfaces : Error { using Error::Error; };
struct InvalidAbsorption : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

// dataset
struct IoError : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };
struct ScheduleError : Error { using Error::Error; };
struct LabelCoverageError : Error { using Error::Error; };
struct ParamError : Error { using Error::Error; };

// id3
struct EmptyPartition : Error { using Error::Error; };
struct UnlabeledSample : Error { using Error::Error; };
struct MissingFeature : Error { using Error::Error; };
struct ModelFormatError : Error { using Error::Error; };

// eval
struct FoldError : Error { using Error::Error; };

// detector
struct InvalidFeature : Error { using Error::Error; };

}  // namespace occusense
