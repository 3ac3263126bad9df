#include "subsketch/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>

#include "subsketch/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "binary formats are little-endian");

namespace subsketch {

namespace {

struct File {
  std::FILE* f = nullptr;
  explicit File(const std::string& path, const char* mode) {
    f = std::fopen(path.c_str(), mode);
  }
  ~File() {
    if (f) std::fclose(f);
  }
};

void put(std::FILE* f, const void* p, std::size_t n) {
  if (std::fwrite(p, 1, n, f) != n) throw OutputUnwritable("short write");
}
void get(std::FILE* f, void* p, std::size_t n) {
  if (std::fread(p, 1, n, f) != n) throw ConfigParse("truncated file");
}
void put_u32(std::FILE* f, std::uint32_t v) { put(f, &v, 4); }
std::uint32_t get_u32(std::FILE* f) {
  std::uint32_t v;
  get(f, &v, 4);
  return v;
}
void put_f64(std::FILE* f, double v) { put(f, &v, 8); }
double get_f64(std::FILE* f) {
  double v;
  get(f, &v, 8);
  return v;
}

}  // namespace

void save_batch(const SketchBatch& batch, int M, const std::string& path) {
  batch.validate();
  File out(path, "wb");
  if (!out.f) throw OutputUnwritable("cannot open " + path);
  std::FILE* f = out.f;
  put(f, "SKB1", 4);
  put_u32(f, 1);
  put_u32(f, static_cast<std::uint32_t>(batch.m()));
  put_u32(f, static_cast<std::uint32_t>(M));
  put_u32(f, static_cast<std::uint32_t>(batch.T()));
  const auto kind = batch.operators.front().kind();
  put_u32(f, kind == SamplerKind::BinarySelection ? 0u : 1u);
  put_u32(f, static_cast<std::uint32_t>(
                 kind == SamplerKind::PhaseShift
                     ? batch.operators.front().bits()
                     : 0));
  put_f64(f, batch.noise_sigma);
  for (const auto& op : batch.operators) {
    if (kind == SamplerKind::BinarySelection) {
      for (int idx : op.indices())
        put_u32(f, static_cast<std::uint32_t>(idx));
    } else {
      const auto& lat = op.phase_lattice();
      for (int r = 0; r < lat.rows(); ++r)
        for (int c = 0; c < lat.cols(); ++c) {
          const std::uint16_t v = static_cast<std::uint16_t>(lat(r, c));
          put(f, &v, 2);
        }
    }
  }
  for (int t = 0; t < batch.T(); ++t)
    for (int r = 0; r < batch.m(); ++r) {
      put_f64(f, batch.X(r, t).real());
      put_f64(f, batch.X(r, t).imag());
    }
}

SketchBatch load_batch(const std::string& path, int* M_out) {
  File in(path, "rb");
  if (!in.f) throw ConfigParse("cannot open " + path);
  std::FILE* f = in.f;
  char magic[4];
  get(f, magic, 4);
  if (std::memcmp(magic, "SKB1", 4) != 0)
    throw ConfigParse(path + ": not a sketch-batch file");
  if (get_u32(f) != 1) throw ConfigParse(path + ": unsupported version");
  const int m = static_cast<int>(get_u32(f));
  const int M = static_cast<int>(get_u32(f));
  const int T = static_cast<int>(get_u32(f));
  const std::uint32_t kind = get_u32(f);
  const int bits = static_cast<int>(get_u32(f));
  const double sigma = get_f64(f);
  if (m < 1 || M < 1 || T < 1 || m > M || kind > 1)
    throw ConfigParse(path + ": bad header");
  SketchBatch batch;
  batch.noise_sigma = sigma;
  batch.operators.reserve(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    if (kind == 0) {
      std::vector<int> idx(static_cast<std::size_t>(m));
      for (int r = 0; r < m; ++r) idx[static_cast<std::size_t>(r)] =
          static_cast<int>(get_u32(f));
      batch.operators.push_back(SamplingOperator::selection(std::move(idx), M));
    } else {
      Eigen::MatrixXi lat(m, M);
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < M; ++c) {
          std::uint16_t v;
          get(f, &v, 2);
          lat(r, c) = v;
        }
      batch.operators.push_back(
          SamplingOperator::phase_shift(std::move(lat), bits, M));
    }
  }
  batch.X.resize(m, T);
  for (int t = 0; t < T; ++t)
    for (int r = 0; r < m; ++r) {
      const double re = get_f64(f);
      const double im = get_f64(f);
      batch.X(r, t) = Complex(re, im);
    }
  batch.validate();
  if (M_out) *M_out = M;
  return batch;
}

void save_matrix(const CMatrix& W, const std::string& path) {
  File out(path, "wb");
  if (!out.f) throw OutputUnwritable("cannot open " + path);
  std::FILE* f = out.f;
  put(f, "CMX1", 4);
  put_u32(f, 1);
  put_u32(f, static_cast<std::uint32_t>(W.rows()));
  put_u32(f, static_cast<std::uint32_t>(W.cols()));
  for (int c = 0; c < W.cols(); ++c)
    for (int r = 0; r < W.rows(); ++r) {
      put_f64(f, W(r, c).real());
      put_f64(f, W(r, c).imag());
    }
}

CMatrix load_matrix(const std::string& path) {
  File in(path, "rb");
  if (!in.f) throw ConfigParse("cannot open " + path);
  std::FILE* f = in.f;
  char magic[4];
  get(f, magic, 4);
  if (std::memcmp(magic, "CMX1", 4) != 0)
    throw ConfigParse(path + ": not a matrix file");
  if (get_u32(f) != 1) throw ConfigParse(path + ": unsupported version");
  const int rows = static_cast<int>(get_u32(f));
  const int cols = static_cast<int>(get_u32(f));
  if (rows < 0 || cols < 0) throw ConfigParse(path + ": bad header");
  CMatrix W(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) {
      const double re = get_f64(f);
      const double im = get_f64(f);
      W(r, c) = Complex(re, im);
    }
  return W;
}

CsvWriter::CsvWriter(const std::string& path,
                     const std::vector<std::string>& header)
    : columns_(header.size()) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw OutputUnwritable("cannot open " + path);
  file_ = f;
  row(header);
}

CsvWriter::~CsvWriter() {
  if (file_) std::fclose(static_cast<std::FILE*>(file_));
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_)
    throw OutputUnwritable("csv row width mismatch");
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    line += fields[i];
  }
  line += '\n';
  put(static_cast<std::FILE*>(file_), line.data(), line.size());
}

std::string CsvWriter::num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  return buf;
}

std::string CsvWriter::num(int x) { return std::to_string(x); }
std::string CsvWriter::num(long long x) { return std::to_string(x); }

}  // namespace subsketch
