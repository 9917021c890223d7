#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace slicelat {

enum class ErrorCode {
    // wire and trace codec
    TruncatedHeader,
    UnsupportedVersion,
    NotGpdu,
    TruncatedPacket,
    UnsupportedIpVersion,
    UnknownVersion,
    MalformedLine,
    InvalidEvent,
    // correlation
    InvalidConfig,
    WrongEventKind,
    ClockRegression,
    // statistics
    NegativeDelay,
    EmptyStats,
    InvalidQuantile,
    LayoutMismatch,
    // generator
    InvalidProfile,
    // command layer
    IoError,
    SchemaError,
    PrivilegeError,
    NamespaceNotFound,
    InterfaceNotFound,
    ProbeLoadError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace slicelat
