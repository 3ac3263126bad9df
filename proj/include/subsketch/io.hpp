#pragma once

#include <string>
#include <vector>

#include "subsketch/channel.hpp"
#include "subsketch/types.hpp"

namespace subsketch {

// --- Binary sketch-batch file ---------------------------------------------
// Little-endian layout:
//   magic "SKB1", u32 version (=1), u32 m, u32 M, u32 T, u32 kind
//   (0 = binary selection, 1 = phase shift), u32 bits (0 for selection),
//   f64 noise_sigma;
//   operators: selection -> T blocks of m u32 ascending zero-based antenna
//   indices; phase shift -> T blocks of m*M u16 phase-lattice indices,
//   row-major;
//   X: column-major, f64 interleaved (re, im) per entry.
void save_batch(const SketchBatch& batch, int M, const std::string& path);
SketchBatch load_batch(const std::string& path, int* M_out = nullptr);

// --- Binary complex-matrix file -------------------------------------------
// magic "CMX1", u32 version (=1), u32 rows, u32 cols, then column-major f64
// interleaved (re, im).
void save_matrix(const CMatrix& W, const std::string& path);
CMatrix load_matrix(const std::string& path);

// --- CSV -------------------------------------------------------------------
// UTF-8, comma-separated, one header row, floats printed with 9 significant
// digits; byte-identical output for identical inputs.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<std::string>& fields);

  static std::string num(double x);
  static std::string num(int x);
  static std::string num(long long x);

 private:
  void* file_ = nullptr;
  std::size_t columns_ = 0;
};

}  // namespace subsketch
