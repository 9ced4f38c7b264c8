#pragma once

#include <stdexcept>
#include <string>

namespace diachron {

// Input outside an operation's domain (year out of range, empty sequence...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Lemma sidecar does not line up with the document's tokens.
class AlignmentError : public std::runtime_error {
public:
    AlignmentError(const std::string& doc_id, std::size_t expected, std::size_t got)
        : std::runtime_error("lemma alignment error in document '" + doc_id + "': expected " +
                             std::to_string(expected) + " lemmas, got " + std::to_string(got)),
          doc_id_(doc_id) {}

    const std::string& doc_id() const noexcept { return doc_id_; }

private:
    std::string doc_id_;
};

// A pipeline artifact expected on disk is missing.
class MissingArtifactError : public std::runtime_error {
public:
    explicit MissingArtifactError(const std::string& path)
        : std::runtime_error("missing prerequisite artifact: " + path), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace diachron
