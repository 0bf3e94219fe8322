#include "simdetect/source_file.hpp"

#include <cstdint>

namespace simdetect {

std::string decode_utf8_lossy(std::string_view bytes) {
    static constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
    std::string out;
    out.reserve(bytes.size());
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::size_t n = bytes.size();
    std::size_t i = 0;
    while (i < n) {
        const unsigned char c = p[i];
        if (c < 0x80) {
            out.push_back(static_cast<char>(c));
            ++i;
            continue;
        }
        std::size_t len = 0;
        std::uint32_t cp = 0;
        if ((c & 0xE0) == 0xC0) { len = 2; cp = c & 0x1F; }
        else if ((c & 0xF0) == 0xE0) { len = 3; cp = c & 0x0F; }
        else if ((c & 0xF8) == 0xF0) { len = 4; cp = c & 0x07; }
        bool ok = len != 0 && i + len <= n;
        for (std::size_t k = 1; ok && k < len; ++k) {
            if ((p[i + k] & 0xC0) != 0x80) ok = false;
            else cp = (cp << 6) | (p[i + k] & 0x3F);
        }
        if (ok) {
            // Reject overlong forms, surrogates and out-of-range code points.
            if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
                (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF)
                ok = false;
        }
        if (ok) {
            out.append(bytes.substr(i, len));
            i += len;
        } else {
            out.append(kReplacement);
            ++i;
        }
    }
    return out;
}

std::string sanitize_relative_path(std::string_view raw) {
    std::string out;
    std::size_t i = 0;
    while (i <= raw.size()) {
        std::size_t j = i;
        while (j < raw.size() && raw[j] != '/' && raw[j] != '\\') ++j;
        const auto seg = raw.substr(i, j - i);
        if (seg == "..") return {};
        if (!seg.empty() && seg != ".") {
            if (!out.empty()) out.push_back('/');
            out.append(seg);
        }
        i = j + 1;
    }
    return out;
}

}  // namespace simdetect
