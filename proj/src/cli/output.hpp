// Copyright 2026 The canoe-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace canoe::cli {

using Cell = std::variant<std::string, double, std::int64_t, std::uint64_t, bool>;
using Row = std::vector<Cell>;

/// 17 significant digits, '.' decimal, "nan"/"inf" spelled out.
std::string format_double(double x);
std::string format_cell(const Cell& c);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> columns);
  void write(const Row& row);
  std::size_t rows() const noexcept { return rows_; }
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t width_;
  std::size_t rows_ = 0;
};

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

/// Runs task(i) for i in [0, n) on a bounded pool. Results reach `sink` on the
/// calling thread in index order, so output is identical for any worker count.
void run_pool(std::size_t n, int workers, const std::function<std::vector<Row>(std::size_t)>& task,
              const std::function<void(std::vector<Row>&&)>& sink);

int default_workers();

}  // namespace canoe::cli
