#include "glyphdesc/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "glyphdesc/error.hpp"

namespace gd {

namespace {

// Next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      if (!tok.empty()) break;
    } else {
      tok.push_back(static_cast<char>(c));
    }
    c = in.get();
  }
  return tok;
}

int parse_positive(const std::string& tok, const std::filesystem::path& path) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v < 1) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::FormatError, "bad PGM header field '" + tok + "' in " + path.string());
  }
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open " + path.string());
  }
  const std::string magic = next_token(in);
  if (magic == "P6" || magic == "P3") {
    throw Error(ErrorCode::FormatError, "colour image rejected: " + path.string());
  }
  if (magic != "P5") {
    throw Error(ErrorCode::FormatError, "not a binary PGM: " + path.string());
  }
  const int w = parse_positive(next_token(in), path);
  const int h = parse_positive(next_token(in), path);
  const int maxval = parse_positive(next_token(in), path);
  if (maxval > 255) {
    throw Error(ErrorCode::FormatError, "only 8-bit PGM is supported: " + path.string());
  }
  std::vector<unsigned char> raw(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw Error(ErrorCode::FormatError, "truncated pixel data: " + path.string());
  }
  std::vector<double> data(raw.size());
  std::transform(raw.begin(), raw.end(), data.begin(),
                 [maxval](unsigned char v) { return static_cast<double>(std::min<int>(v, maxval)) / maxval; });
  return GrayImage(w, h, std::move(data));
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write " + path.string());
  }
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  std::vector<unsigned char> raw(img.size());
  std::transform(img.pixels().begin(), img.pixels().end(), raw.begin(), [](double v) {
    return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  });
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) {
    throw Error(ErrorCode::IoError, "write failed: " + path.string());
  }
}

}  // namespace gd
