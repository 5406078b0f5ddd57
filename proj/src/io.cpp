#include "thermobem/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "thermobem/errors.hpp"

namespace thermobem {

std::complex<double> parse_complex(const std::string& text) {
    std::string t;
    for (char c : text)
        if (!isspace(static_cast<unsigned char>(c))) t.push_back(c);
    if (t.empty()) throw UsageError("empty complex literal");

    // split at the last '+'/'-' that is not part of an exponent and not leading
    std::size_t split = std::string::npos;
    for (std::size_t i = t.size(); i-- > 1;) {
        if ((t[i] == '+' || t[i] == '-') && t[i - 1] != 'e' && t[i - 1] != 'E') {
            split = i;
            break;
        }
    }
    auto to_double = [](const std::string& s) {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw UsageError("bad number in complex literal: \"" + s + "\"");
        return v;
    };
    auto imag_part = [&](std::string s) {
        s.pop_back(); // trailing 'i'
        if (s.empty() || s == "+") return 1.0;
        if (s == "-") return -1.0;
        return to_double(s);
    };
    if (t.back() == 'i' || t.back() == 'I') {
        t.back() = 'i';
        if (split == std::string::npos) return {0.0, imag_part(t)};
        return {to_double(t.substr(0, split)), imag_part(t.substr(split))};
    }
    if (split != std::string::npos && t.find('i') != std::string::npos)
        throw UsageError("malformed complex literal \"" + text + "\"");
    return {to_double(t), 0.0};
}

std::string format_complex(std::complex<double> z) {
    std::ostringstream os;
    os << format_g17(z.real());
    os << (z.imag() < 0 ? "-" : "+") << format_g17(std::abs(z.imag())) << "i";
    return os.str();
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open file \"" + path + "\"");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write file \"" + path + "\"");
    out << content;
}

} // namespace thermobem
