#include "slicelat/error.hpp"

namespace slicelat {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::TruncatedHeader: return "TruncatedHeader";
        case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
        case ErrorCode::NotGpdu: return "NotGpdu";
        case ErrorCode::TruncatedPacket: return "TruncatedPacket";
        case ErrorCode::UnsupportedIpVersion: return "UnsupportedIpVersion";
        case ErrorCode::UnknownVersion: return "UnknownVersion";
        case ErrorCode::MalformedLine: return "MalformedLine";
        case ErrorCode::InvalidEvent: return "InvalidEvent";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::WrongEventKind: return "WrongEventKind";
        case ErrorCode::ClockRegression: return "ClockRegression";
        case ErrorCode::NegativeDelay: return "NegativeDelay";
        case ErrorCode::EmptyStats: return "EmptyStats";
        case ErrorCode::InvalidQuantile: return "InvalidQuantile";
        case ErrorCode::LayoutMismatch: return "LayoutMismatch";
        case ErrorCode::InvalidProfile: return "InvalidProfile";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::PrivilegeError: return "PrivilegeError";
        case ErrorCode::NamespaceNotFound: return "NamespaceNotFound";
        case ErrorCode::InterfaceNotFound: return "InterfaceNotFound";
        case ErrorCode::ProbeLoadError: return "ProbeLoadError";
    }
    return "Unknown";
}

}  // namespace slicelat
