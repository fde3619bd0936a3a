#pragma once
// Deterministic JSON emission for artifacts. Keys keep insertion order and
// doubles are printed with 17 significant digits, which round-trips 64-bit
// values exactly and keeps repeated runs byte-identical.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "careflow/matrix.hpp"

namespace careflow {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

inline std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

// Streaming writer with two-space indentation. Usage mirrors the document
// structure: begin_object/key/value/end_object and so on.
class JsonWriter {
public:
    JsonWriter& begin_object() { return open('{'); }
    JsonWriter& end_object() { return close('}'); }
    JsonWriter& begin_array() { return open('['); }
    JsonWriter& end_array() { return close(']'); }

    JsonWriter& key(const std::string& name) {
        comma();
        indent();
        out_ += '"';
        out_ += json_escape(name);
        out_ += "\": ";
        pending_value_ = true;
        return *this;
    }

    JsonWriter& value(double v) { return raw(fmt_double(v)); }
    JsonWriter& value(int v) { return raw(std::to_string(v)); }
    JsonWriter& value(std::int64_t v) { return raw(std::to_string(v)); }
    JsonWriter& value(std::uint64_t v) { return raw(std::to_string(v)); }
    JsonWriter& value(bool v) { return raw(v ? "true" : "false"); }
    JsonWriter& null_value() { return raw("null"); }
    JsonWriter& value(const char* v) { return value(std::string(v)); }
    JsonWriter& value(const std::string& v) { return raw('"' + json_escape(v) + '"'); }

    JsonWriter& value(const std::vector<double>& vs) {
        begin_array();
        for (double v : vs) value(v);
        return end_array();
    }

    // Flat row-major array; pair with a separate shape entry.
    JsonWriter& value(const Matrix& m) { return value(m.data); }

    std::string str() const { return out_ + "\n"; }

private:
    JsonWriter& open(char c) {
        comma();
        indent();
        out_ += c;
        stack_.push_back(c == '{' ? '}' : ']');
        first_.push_back(true);
        pending_value_ = false;
        return *this;
    }

    JsonWriter& close(char expected) {
        const bool empty = first_.back();
        stack_.pop_back();
        first_.pop_back();
        if (!empty) {
            out_ += '\n';
            out_.append(2 * stack_.size(), ' ');
        }
        out_ += expected;
        mark_written();
        return *this;
    }

    JsonWriter& raw(const std::string& text) {
        comma();
        indent();
        out_ += text;
        mark_written();
        return *this;
    }

    void comma() {
        if (pending_value_) return;
        if (!first_.empty()) {
            if (!first_.back()) out_ += ',';
            first_.back() = false;
            out_ += '\n';
        }
    }

    void indent() {
        if (pending_value_) return;
        out_.append(2 * stack_.size(), ' ');
    }

    void mark_written() {
        pending_value_ = false;
        if (!first_.empty()) first_.back() = false;
    }

    std::string out_;
    std::vector<char> stack_;
    std::vector<bool> first_;
    bool pending_value_ = false;
};

}  // namespace careflow
