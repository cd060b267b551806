#include "glyphdesc/error.hpp"

namespace gd {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::InvalidImage: return "InvalidImage";
    case ErrorCode::RectOutOfBounds: return "RectOutOfBounds";
    case ErrorCode::EvenKernel: return "EvenKernel";
    case ErrorCode::SingularHomography: return "SingularHomography";
    case ErrorCode::WrongWindowSize: return "WrongWindowSize";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::BadLabel: return "BadLabel";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::CornersNotFound: return "CornersNotFound";
    case ErrorCode::SpecMismatch: return "SpecMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatError: return "FormatError";
  }
  return "Unknown";
}

}  // namespace gd
