#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

namespace sonarpipe {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
public:
    IoError(const std::filesystem::path& path, const std::string& what)
        : Error(path.string() + ": " + what), path_(path) {}

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

/// Input violates a type invariant or an operation precondition.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Malformed text input. `line` is 1-based, 0 when not line-oriented.
class ParseError : public Error {
public:
    ParseError(const std::filesystem::path& path, std::size_t line, const std::string& what)
        : Error(path.string() + ":" + std::to_string(line) + ": " + what), path_(path), line_(line) {}

    const std::filesystem::path& path() const noexcept { return path_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::filesystem::path path_;
    std::size_t line_;
};

/// Frames of a clip were presented out of order to a stateful stage.
class SequencingError : public Error {
public:
    using Error::Error;
};

/// Wraps an error raised inside one pipeline stage for one clip.
class StageError : public Error {
public:
    StageError(std::string stage, std::string clip_id, const std::string& what)
        : Error("[" + stage + "] clip '" + clip_id + "': " + what),
          stage_(std::move(stage)), clip_id_(std::move(clip_id)) {}

    const std::string& stage() const noexcept { return stage_; }
    const std::string& clip_id() const noexcept { return clip_id_; }

private:
    std::string stage_;
    std::string clip_id_;
};

}  // namespace sonarpipe
