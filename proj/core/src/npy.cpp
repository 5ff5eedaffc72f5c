#include "urn/npy.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

namespace urn {

namespace {

constexpr char kMagic[6] = {'\x93', 'N', 'U', 'M', 'P', 'Y'};

struct Header {
  std::string descr;
  bool fortran_order = false;
  std::vector<std::size_t> shape;
};

std::string build_header(const std::string& descr, const std::vector<std::size_t>& shape) {
  std::ostringstream dict;
  dict << "{'descr': '" << descr << "', 'fortran_order': False, 'shape': (";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    dict << shape[i];
    if (shape.size() == 1 || i + 1 < shape.size()) dict << ",";
    if (i + 1 < shape.size()) dict << " ";
  }
  dict << "), }";
  std::string header = dict.str();
  // Pad with spaces so that magic+version+len+header is a multiple of 64,
  // terminated by newline (the v1.0 layout numpy itself writes).
  const std::size_t unpadded = 6 + 2 + 2 + header.size() + 1;
  const std::size_t padding = (64 - unpadded % 64) % 64;
  header.append(padding, ' ');
  header.push_back('\n');
  return header;
}

void write_npy(const std::filesystem::path& path, const std::string& descr,
               const std::vector<std::size_t>& shape, const void* data, std::size_t bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path.string());
  const std::string header = build_header(descr, shape);
  f.write(kMagic, 6);
  f.put('\x01');
  f.put('\x00');
  const std::uint16_t len = static_cast<std::uint16_t>(header.size());
  f.put(static_cast<char>(len & 0xff));
  f.put(static_cast<char>(len >> 8));
  f.write(header.data(), static_cast<std::streamsize>(header.size()));
  f.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  if (!f) throw IoError("failed writing: " + path.string());
}

// Minimal parser for the python dict literal in the header. Tolerates
// arbitrary spacing and key order; rejects anything structurally off.
Header parse_header(const std::string& text, const std::string& file) {
  Header h;
  const auto find_key = [&](const std::string& key) -> std::size_t {
    const std::size_t pos = text.find("'" + key + "'");
    if (pos == std::string::npos) throw IoError("NPY header missing '" + key + "': " + file);
    std::size_t colon = text.find(':', pos);
    if (colon == std::string::npos) throw IoError("malformed NPY header: " + file);
    return colon + 1;
  };

  // descr
  {
    std::size_t p = find_key("descr");
    while (p < text.size() && (text[p] == ' ')) ++p;
    if (p >= text.size() || text[p] != '\'') throw IoError("malformed NPY header: " + file);
    const std::size_t endq = text.find('\'', p + 1);
    if (endq == std::string::npos) throw IoError("malformed NPY header: " + file);
    h.descr = text.substr(p + 1, endq - p - 1);
  }
  // fortran_order
  {
    std::size_t p = find_key("fortran_order");
    while (p < text.size() && text[p] == ' ') ++p;
    if (text.compare(p, 4, "True") == 0) {
      h.fortran_order = true;
    } else if (text.compare(p, 5, "False") == 0) {
      h.fortran_order = false;
    } else {
      throw IoError("malformed NPY header: " + file);
    }
  }
  // shape
  {
    std::size_t p = find_key("shape");
    while (p < text.size() && text[p] == ' ') ++p;
    if (p >= text.size() || text[p] != '(') throw IoError("malformed NPY header: " + file);
    const std::size_t close = text.find(')', p);
    if (close == std::string::npos) throw IoError("malformed NPY header: " + file);
    std::string dims = text.substr(p + 1, close - p - 1);
    std::stringstream ss(dims);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok.erase(std::remove(tok.begin(), tok.end(), ' '), tok.end());
      if (tok.empty()) continue;
      h.shape.push_back(static_cast<std::size_t>(std::stoull(tok)));
    }
  }
  return h;
}

struct RawArray {
  Header header;
  std::vector<char> data;
  std::size_t element_size = 0;
};

RawArray read_npy(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path.string());
  char magic[6];
  f.read(magic, 6);
  if (!f || std::memcmp(magic, kMagic, 6) != 0) {
    throw IoError("not an NPY file (bad magic): " + path.string());
  }
  char version[2];
  f.read(version, 2);
  if (!f || version[0] != 1) {
    throw IoError("unsupported NPY version: " + path.string());
  }
  unsigned char len_bytes[2];
  f.read(reinterpret_cast<char*>(len_bytes), 2);
  if (!f) throw IoError("truncated NPY header: " + path.string());
  const std::size_t header_len = len_bytes[0] | (static_cast<std::size_t>(len_bytes[1]) << 8);
  std::string header_text(header_len, '\0');
  f.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!f) throw IoError("truncated NPY header: " + path.string());

  RawArray arr;
  arr.header = parse_header(header_text, path.string());
  if (arr.header.fortran_order) {
    throw IoError("unsupported order (fortran_order=True): " + path.string());
  }
  const std::string& d = arr.header.descr;
  if (d == "<f8") arr.element_size = 8;
  else if (d == "<f4") arr.element_size = 4;
  else if (d == "|u1") arr.element_size = 1;
  else if (d == "<u2") arr.element_size = 2;
  else throw IoError("unsupported dtype '" + d + "': " + path.string());

  std::size_t count = 1;
  for (const std::size_t s : arr.header.shape) count *= s;
  arr.data.resize(count * arr.element_size);
  f.read(arr.data.data(), static_cast<std::streamsize>(arr.data.size()));
  if (!f || f.gcount() != static_cast<std::streamsize>(arr.data.size())) {
    throw IoError("NPY payload does not match header shape: " + path.string());
  }
  if (f.peek() != std::ifstream::traits_type::eof()) {
    throw IoError("NPY payload does not match header shape: " + path.string());
  }
  return arr;
}

std::vector<double> to_doubles(const RawArray& arr, const std::filesystem::path& path) {
  std::size_t count = 1;
  for (const std::size_t s : arr.header.shape) count *= s;
  std::vector<double> out(count);
  if (arr.header.descr == "<f8") {
    std::memcpy(out.data(), arr.data.data(), count * 8);
  } else if (arr.header.descr == "<f4") {
    const float* src = reinterpret_cast<const float*>(arr.data.data());
    for (std::size_t i = 0; i < count; ++i) out[i] = src[i];
  } else {
    throw IoError("expected a float array: " + path.string());
  }
  return out;
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  std::filesystem::path p = path;
  p += ".meta";
  return p;
}

}  // namespace

void write_score_map(const ScoreMap& map, const std::filesystem::path& path) {
  map.validate();
  write_npy(path, "<f8",
            {static_cast<std::size_t>(map.classes()), static_cast<std::size_t>(map.height()),
             static_cast<std::size_t>(map.width())},
            map.values().data(), map.values().size() * 8);
  std::ofstream meta(sidecar_path(path));
  if (!meta) throw IoError("cannot write sidecar: " + sidecar_path(path).string());
  meta << "kind = " << (map.kind() == ScoreKind::logits ? "logits" : "probabilities") << "\n";
}

ScoreMap read_score_map(const std::filesystem::path& path) {
  const RawArray arr = read_npy(path);
  if (arr.header.shape.size() != 3) {
    throw IoError("score map must be 3-D (C,H,W): " + path.string());
  }
  ScoreKind kind = ScoreKind::logits;
  std::ifstream meta(sidecar_path(path));
  if (meta) {
    std::string line;
    while (std::getline(meta, line)) {
      if (line.find("probabilities") != std::string::npos) kind = ScoreKind::probabilities;
    }
  }
  return ScoreMap(static_cast<int>(arr.header.shape[0]), static_cast<int>(arr.header.shape[1]),
                  static_cast<int>(arr.header.shape[2]), kind, to_doubles(arr, path));
}

void write_gray_map(const GrayMap& map, const std::filesystem::path& path) {
  map.validate();
  write_npy(path, "<f8",
            {static_cast<std::size_t>(map.height()), static_cast<std::size_t>(map.width())},
            map.values().data(), map.values().size() * 8);
}

GrayMap read_gray_map(const std::filesystem::path& path) {
  const RawArray arr = read_npy(path);
  if (arr.header.shape.size() != 2) throw IoError("gray map must be 2-D (H,W): " + path.string());
  return GrayMap(static_cast<int>(arr.header.shape[0]), static_cast<int>(arr.header.shape[1]),
                 to_doubles(arr, path));
}

void write_label_mask(const LabelMask& mask, const std::filesystem::path& path, int num_classes_hint) {
  mask.validate();
  (void)num_classes_hint;
  if (mask.num_classes() > 256) {
    throw ValidationError("label mask NPY writer supports at most 256 classes");
  }
  std::vector<std::uint8_t> bytes(mask.pixel_count());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    bytes[i] = static_cast<std::uint8_t>(mask.labels()[i]);
  }
  write_npy(path, "|u1",
            {static_cast<std::size_t>(mask.height()), static_cast<std::size_t>(mask.width())},
            bytes.data(), bytes.size());
}

LabelMask read_label_mask(const std::filesystem::path& path, int num_classes) {
  const RawArray arr = read_npy(path);
  if (arr.header.shape.size() != 2) throw IoError("label mask must be 2-D (H,W): " + path.string());
  const std::size_t count = arr.header.shape[0] * arr.header.shape[1];
  std::vector<std::int32_t> labels(count);
  if (arr.header.descr == "|u1") {
    const std::uint8_t* src = reinterpret_cast<const std::uint8_t*>(arr.data.data());
    for (std::size_t i = 0; i < count; ++i) labels[i] = src[i];
  } else if (arr.header.descr == "<u2") {
    const std::uint16_t* src = reinterpret_cast<const std::uint16_t*>(arr.data.data());
    for (std::size_t i = 0; i < count; ++i) labels[i] = src[i];
  } else {
    throw IoError("label mask expects unsigned integer dtype: " + path.string());
  }
  return LabelMask(static_cast<int>(arr.header.shape[0]), static_cast<int>(arr.header.shape[1]),
                   num_classes, std::move(labels));
}

}  // namespace urn
