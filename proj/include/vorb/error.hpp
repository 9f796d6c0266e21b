// Exception hierarchy shared by all vorb modules.
//
// Every failure the numerical layers can report derives from vorb::Error, so
// callers that only care about "did it work" catch one type, while tests and
// the CLI can discriminate on the concrete class.

#ifndef VORB_ERROR_HPP
#define VORB_ERROR_HPP

#include <stdexcept>
#include <string>

namespace vorb {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define VORB_DEFINE_ERROR(Name)                 \
  class Name : public Error {                   \
   public:                                      \
    explicit Name(const std::string& what)      \
        : Error(std::string(#Name ": ") + what) {} \
  }

VORB_DEFINE_ERROR(InvalidArgument);
VORB_DEFINE_ERROR(CollisionError);
VORB_DEFINE_ERROR(DomainError);
VORB_DEFINE_ERROR(BoundaryError);
VORB_DEFINE_ERROR(NoConvergence);
VORB_DEFINE_ERROR(LeftDomain);
VORB_DEFINE_ERROR(ZeroTotalVorticity);
VORB_DEFINE_ERROR(DimensionMismatch);
VORB_DEFINE_ERROR(DegenerateFrame);
VORB_DEFINE_ERROR(VorticityMismatch);
VORB_DEFINE_ERROR(AliasWarning);
VORB_DEFINE_ERROR(SingularOperator);
VORB_DEFINE_ERROR(ContractionFailure);
VORB_DEFINE_ERROR(PhaseDefect);
VORB_DEFINE_ERROR(DomainExit);
VORB_DEFINE_ERROR(EmptyPath);
VORB_DEFINE_ERROR(CollisionApproach);
VORB_DEFINE_ERROR(BoundaryApproach);
VORB_DEFINE_ERROR(MinStepReached);
VORB_DEFINE_ERROR(ParseError);

#undef VORB_DEFINE_ERROR

}  // namespace vorb

#endif  // VORB_ERROR_HPP
