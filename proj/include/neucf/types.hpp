#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <string_view>

namespace neucf {

using Vec2 = Eigen::Vector2d;

/// Beacon colour role: orange balls are reach targets, green balls are stop cues.
enum class BeaconColor { Orange, Green };

std::string_view to_string(BeaconColor c);
BeaconColor beacon_color_from_string(std::string_view s);

/// Base class for every error raised by the library. `kind()` is a stable
/// identifier used by the CLI diagnostics and the service nack reasons.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define NEUCF_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  };

// geometry / vision
NEUCF_DEFINE_ERROR(CollinearPoints)
NEUCF_DEFINE_ERROR(OutOfFrame)
NEUCF_DEFINE_ERROR(ImageFormatError)
// tracker
NEUCF_DEFINE_ERROR(ClockRegression)
// field
NEUCF_DEFINE_ERROR(TargetBehindField)
NEUCF_DEFINE_ERROR(NumericalBlowup)
NEUCF_DEFINE_ERROR(InvalidParameter)
// controller
NEUCF_DEFINE_ERROR(DegenerateReach)
NEUCF_DEFINE_ERROR(IllConditioned)
NEUCF_DEFINE_ERROR(HorizonExceeded)
// baseline
NEUCF_DEFINE_ERROR(NonpositiveHorizon)
NEUCF_DEFINE_ERROR(OutOfHorizon)
// metrics
NEUCF_DEFINE_ERROR(TooFewSamples)
NEUCF_DEFINE_ERROR(DegeneratePath)
NEUCF_DEFINE_ERROR(NonuniformSampling)
// scenarios / io
NEUCF_DEFINE_ERROR(ParseError)
NEUCF_DEFINE_ERROR(ValidationError)
NEUCF_DEFINE_ERROR(ScenarioInvalid)
// service
NEUCF_DEFINE_ERROR(SessionNotFinished)
NEUCF_DEFINE_ERROR(SessionNotFound)

#undef NEUCF_DEFINE_ERROR

}  // namespace neucf
