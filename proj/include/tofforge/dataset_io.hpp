// dataset_io.hpp -- on-disk dataset format
//
// A dataset is a directory holding
//   manifest.json   schema_version, master_seed, bin_width_ps, num_bins,
//                   label_map, generation parameters, scenario table,
//                   sample_count, payload size and CRC-32
//   samples.bin     little-endian records, in (scenario_id, replicate_id) order:
//                   u32 scenario_id, u32 replicate_id, u16 label, u32 x K counts
//   samples.csv     optional export: label,scenario_id,replicate_id,c0..c{K-1}
#pragma once

#include <zlib.h>

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tofforge/dataset.hpp"

namespace tofforge {

enum class DatasetErrc {
  io_error,
  malformed,
  version_mismatch,
  truncated,
  checksum_mismatch,
};

inline const char* to_string(DatasetErrc e) {
  switch (e) {
    case DatasetErrc::io_error: return "io_error";
    case DatasetErrc::malformed: return "malformed";
    case DatasetErrc::version_mismatch: return "version_mismatch";
    case DatasetErrc::truncated: return "truncated";
    case DatasetErrc::checksum_mismatch: return "checksum_mismatch";
  }
  return "unknown";
}

class DatasetError : public std::runtime_error {
 public:
  DatasetError(DatasetErrc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_{code} {}
  DatasetErrc code() const noexcept { return code_; }

 private:
  DatasetErrc code_;
};

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kPayloadFile = "samples.bin";
inline constexpr const char* kCsvFile = "samples.csv";
inline constexpr const char* kFormatName = "tof-forge-dataset";

inline std::size_t record_bytes(std::size_t num_bins) { return 4 + 4 + 2 + 4 * num_bins; }

/// Streaming CRC-32 (zlib polynomial).
class Crc32 {
 public:
  void update(std::span<const unsigned char> bytes) {
    while (!bytes.empty()) {
      const auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size(), 1u << 30));
      crc_ = ::crc32(crc_, bytes.data(), n);
      bytes = bytes.subspan(n);
    }
  }
  std::uint32_t value() const { return static_cast<std::uint32_t>(crc_); }

 private:
  uLong crc_ = ::crc32(0L, Z_NULL, 0);
};

// ---------------------------------------------------------------------------
// Manifest JSON
// ---------------------------------------------------------------------------

inline json scenario_to_json(const Scenario& s) {
  json j{{"scenario_id", s.id},
         {"label", s.label},
         {"target", s.target},
         {"pose_index", s.pose_index},
         {"theta_x_rad", s.pose.theta_x},
         {"theta_z_rad", s.pose.theta_z},
         {"theta_x_deg", s.pose.theta_x_deg()},
         {"theta_z_deg", s.pose.theta_z_deg()},
         {"distance_km", s.distance_km},
         {"n_pulses", s.n_pulses},
         {"signal_photons", s.signal_photons},
         {"noise_photons", s.noise_photons},
         {"noise_per_bin", s.noise_per_bin},
         {"condition", condition_key(s)}};
  j[s.noise.mode == NoiseSpec::Mode::snr ? "snr" : "noise_level"] = s.noise.value;
  return j;
}

inline Scenario scenario_from_json(const json& j) {
  Scenario s;
  s.id = j.at("scenario_id").get<std::uint32_t>();
  s.label = j.at("label").get<std::uint16_t>();
  s.target = j.at("target").get<std::size_t>();
  s.pose_index = j.at("pose_index").get<std::size_t>();
  s.pose = Pose{j.at("theta_x_rad").get<double>(), j.at("theta_z_rad").get<double>()};
  s.distance_km = j.at("distance_km").get<double>();
  if (j.contains("snr")) s.noise = NoiseSpec::from_snr(j["snr"].get<double>());
  else s.noise = NoiseSpec::from_noise_level(j.at("noise_level").get<double>());
  s.n_pulses = j.at("n_pulses").get<std::uint64_t>();
  s.signal_photons = j.at("signal_photons").get<double>();
  s.noise_photons = j.at("noise_photons").get<double>();
  s.noise_per_bin = j.at("noise_per_bin").get<double>();
  return s;
}

inline json manifest_to_json(const Manifest& m, const std::optional<std::string>& created_utc = {}) {
  json scenarios = json::array();
  for (const auto& s : m.scenarios) scenarios.push_back(scenario_to_json(s));
  json j{{"format", kFormatName},
         {"schema_version", m.schema_version},
         {"master_seed", m.master_seed},
         {"bin_width_ps", m.bin_width_ps},
         {"bin_width_s", m.bin_width_s},
         {"num_bins", m.num_bins},
         {"replicates", m.replicates},
         {"label_map", m.label_map},
         {"parameters", m.parameters},
         {"scenarios", scenarios},
         {"sample_count", m.sample_count},
         {"split_ratio", m.split_ratio},
         {"payload",
          {{"file", kPayloadFile},
           {"bytes", m.payload_bytes},
           {"crc32", m.payload_crc32},
           {"record_bytes", record_bytes(m.num_bins)},
           {"byte_order", "little"}}},
         {"provenance", m.provenance}};
  if (created_utc) j["created_utc"] = *created_utc;
  return j;
}

/// Parses a manifest. The schema version is checked before anything else.
inline Manifest manifest_from_json(const json& j) {
  if (!j.is_object() || !j.contains("schema_version"))
    throw DatasetError(DatasetErrc::malformed, "manifest lacks schema_version");
  if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != kSchemaVersion)
    throw DatasetError(DatasetErrc::version_mismatch,
                       "unsupported schema_version " + j["schema_version"].dump() +
                           " (this build reads " + std::to_string(kSchemaVersion) + ")");
  try {
    Manifest m;
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.bin_width_ps = j.at("bin_width_ps").get<double>();
    m.bin_width_s = j.contains("bin_width_s") ? j["bin_width_s"].get<double>() : m.bin_width_ps * 1e-12;
    m.num_bins = j.at("num_bins").get<std::size_t>();
    m.replicates = j.at("replicates").get<std::uint32_t>();
    m.label_map = j.at("label_map").get<std::vector<std::string>>();
    m.parameters = j.at("parameters");
    for (const auto& s : j.at("scenarios")) m.scenarios.push_back(scenario_from_json(s));
    m.sample_count = j.at("sample_count").get<std::uint64_t>();
    m.split_ratio = j.at("split_ratio").get<double>();
    const auto& p = j.at("payload");
    m.payload_bytes = p.at("bytes").get<std::uint64_t>();
    m.payload_crc32 = p.at("crc32").get<std::uint32_t>();
    m.provenance = j.at("provenance");
    if (m.num_bins == 0) throw DatasetError(DatasetErrc::malformed, "num_bins is zero");
    for (std::size_t i = 1; i < m.scenarios.size(); ++i)
      if (m.scenarios[i].id <= m.scenarios[i - 1].id)
        throw DatasetError(DatasetErrc::malformed, "scenario table not sorted by id");
    for (const auto& s : m.scenarios)
      if (s.label >= m.label_map.size())
        throw DatasetError(DatasetErrc::malformed, "scenario label outside label_map");
    if (m.sample_count != static_cast<std::uint64_t>(m.scenarios.size()) * m.replicates)
      throw DatasetError(DatasetErrc::malformed, "sample_count disagrees with scenario table");
    if (m.payload_bytes != m.sample_count * record_bytes(m.num_bins))
      throw DatasetError(DatasetErrc::malformed, "payload size disagrees with sample_count");
    return m;
  } catch (const json::exception& e) {
    throw DatasetError(DatasetErrc::malformed, std::string("manifest: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Writing
// ---------------------------------------------------------------------------

namespace detail {

inline void put_u16(unsigned char* p, std::uint16_t v) {
  p[0] = static_cast<unsigned char>(v);
  p[1] = static_cast<unsigned char>(v >> 8);
}
inline void put_u32(unsigned char* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}
inline std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace detail

struct WriteOptions {
  bool csv = false;
  std::optional<std::string> created_utc;  // omitted from the manifest when empty
};

/// Streams samples into `dir`. The payload is written under a temporary
/// name and only renamed, together with the manifest, by finish(); a writer
/// destroyed before finish() removes its partial output.
class DatasetWriter {
 public:
  DatasetWriter(std::filesystem::path dir, std::size_t num_bins, WriteOptions options = {})
      : dir_{std::move(dir)}, num_bins_{num_bins}, options_{std::move(options)},
        record_(record_bytes(num_bins)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw DatasetError(DatasetErrc::io_error, "cannot create '" + dir_.string() + "'");
    payload_.open(partial(kPayloadFile), std::ios::binary | std::ios::trunc);
    if (!payload_) throw DatasetError(DatasetErrc::io_error, "cannot write in '" + dir_.string() + "'");
    if (options_.csv) {
      csv_.open(partial(kCsvFile), std::ios::trunc);
      csv_ << "label,scenario_id,replicate_id";
      for (std::size_t k = 0; k < num_bins_; ++k) csv_ << ",c" << k;
      csv_ << '\n';
    }
  }

  DatasetWriter(const DatasetWriter&) = delete;
  DatasetWriter& operator=(const DatasetWriter&) = delete;

  ~DatasetWriter() {
    if (finished_) return;
    payload_.close();
    csv_.close();
    std::error_code ec;
    std::filesystem::remove(partial(kPayloadFile), ec);
    std::filesystem::remove(partial(kCsvFile), ec);
  }

  void write(const Sample& s) {
    if (s.histogram.counts.size() != num_bins_)
      throw DatasetError(DatasetErrc::malformed, "histogram length differs from num_bins");
    unsigned char* p = record_.data();
    detail::put_u32(p, s.scenario_id);
    detail::put_u32(p + 4, s.replicate_id);
    detail::put_u16(p + 8, s.label);
    for (std::size_t k = 0; k < num_bins_; ++k) detail::put_u32(p + 10 + 4 * k, s.histogram.counts[k]);
    payload_.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(record_.size()));
    crc_.update(record_);
    bytes_ += record_.size();
    ++count_;
    if (options_.csv) {
      csv_ << s.label << ',' << s.scenario_id << ',' << s.replicate_id;
      for (auto c : s.histogram.counts) csv_ << ',' << c;
      csv_ << '\n';
    }
  }

  /// Completes the payload fields of `m`, writes manifest.json and returns
  /// the final manifest.
  Manifest finish(Manifest m) {
    payload_.flush();
    if (!payload_) throw DatasetError(DatasetErrc::io_error, "write failed");
    payload_.close();
    if (options_.csv) csv_.close();
    if (m.sample_count != count_)
      throw DatasetError(DatasetErrc::malformed, "manifest sample_count " + std::to_string(m.sample_count) +
                                                     " != records written " + std::to_string(count_));
    m.num_bins = num_bins_;
    m.payload_bytes = bytes_;
    m.payload_crc32 = crc_.value();
    std::filesystem::rename(partial(kPayloadFile), dir_ / kPayloadFile);
    if (options_.csv) std::filesystem::rename(partial(kCsvFile), dir_ / kCsvFile);
    std::ofstream out(dir_ / kManifestFile, std::ios::trunc);
    out << manifest_to_json(m, options_.created_utc).dump(2) << '\n';
    if (!out) throw DatasetError(DatasetErrc::io_error, "cannot write manifest");
    finished_ = true;
    return m;
  }

 private:
  std::filesystem::path partial(const char* name) const { return dir_ / (std::string(name) + ".partial"); }

  std::filesystem::path dir_;
  std::size_t num_bins_;
  WriteOptions options_;
  std::vector<unsigned char> record_;
  std::ofstream payload_;
  std::ofstream csv_;
  Crc32 crc_;
  std::uint64_t bytes_ = 0;
  std::uint64_t count_ = 0;
  bool finished_ = false;
};

inline Manifest write_dataset(const LabeledDataset& ds, const std::filesystem::path& dir,
                              WriteOptions options = {}) {
  DatasetWriter w(dir, ds.manifest.num_bins, std::move(options));
  for (const auto& s : ds.samples) w.write(s);
  return w.finish(ds.manifest);
}

// ---------------------------------------------------------------------------
// Reading
// ---------------------------------------------------------------------------

/// Random-access reader. Opening validates the manifest, the payload size
/// and (unless disabled) the payload checksum.
class DatasetReader {
 public:
  explicit DatasetReader(std::filesystem::path dir, bool verify_checksum = true) : dir_{std::move(dir)} {
    std::ifstream mf(dir_ / kManifestFile);
    if (!mf) throw DatasetError(DatasetErrc::io_error, "cannot open '" + (dir_ / kManifestFile).string() + "'");
    json j;
    try {
      j = json::parse(mf);
    } catch (const json::exception& e) {
      throw DatasetError(DatasetErrc::malformed, std::string("manifest: ") + e.what());
    }
    manifest_ = manifest_from_json(j);
    bin_width_ = manifest_.bin_width_s;

    const auto path = dir_ / kPayloadFile;
    std::error_code ec;
    const auto size = std::filesystem::file_size(path, ec);
    if (ec) throw DatasetError(DatasetErrc::io_error, "cannot open '" + path.string() + "'");
    if (size < manifest_.payload_bytes)
      throw DatasetError(DatasetErrc::truncated, "payload has " + std::to_string(size) + " bytes, expected " +
                                                     std::to_string(manifest_.payload_bytes));
    if (size > manifest_.payload_bytes)
      throw DatasetError(DatasetErrc::malformed, "payload longer than manifest states");
    payload_.open(path, std::ios::binary);
    if (!payload_) throw DatasetError(DatasetErrc::io_error, "cannot open '" + path.string() + "'");

    if (verify_checksum) {
      Crc32 crc;
      std::vector<unsigned char> buf(1 << 20);
      while (payload_) {
        payload_.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        crc.update(std::span(buf.data(), static_cast<std::size_t>(payload_.gcount())));
      }
      payload_.clear();
      if (crc.value() != manifest_.payload_crc32)
        throw DatasetError(DatasetErrc::checksum_mismatch, "payload CRC-32 does not match manifest");
    }
  }

  const Manifest& manifest() const noexcept { return manifest_; }

  /// All records of the scenario at position `index` of the scenario table.
  std::vector<Sample> read_scenario_at(std::size_t index) {
    const auto& s = manifest_.scenarios.at(index);
    const std::size_t rec = record_bytes(manifest_.num_bins);
    std::vector<unsigned char> buf(rec * manifest_.replicates);
    payload_.seekg(static_cast<std::streamoff>(index * buf.size()));
    payload_.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(payload_.gcount()) != buf.size())
      throw DatasetError(DatasetErrc::truncated, "short read in scenario " + std::to_string(s.id));
    std::vector<Sample> out;
    out.reserve(manifest_.replicates);
    for (std::uint32_t r = 0; r < manifest_.replicates; ++r) {
      const unsigned char* p = buf.data() + r * rec;
      Sample smp;
      smp.scenario_id = detail::get_u32(p);
      smp.replicate_id = detail::get_u32(p + 4);
      smp.label = detail::get_u16(p + 8);
      if (smp.scenario_id != s.id || smp.replicate_id != r || smp.label != s.label)
        throw DatasetError(DatasetErrc::malformed, "record header disagrees with scenario table");
      smp.histogram.bin_width = bin_width_;
      smp.histogram.n_pulses = s.n_pulses;
      smp.histogram.counts.resize(manifest_.num_bins);
      for (std::size_t k = 0; k < manifest_.num_bins; ++k)
        smp.histogram.counts[k] = detail::get_u32(p + 10 + 4 * k);
      out.push_back(std::move(smp));
    }
    return out;
  }

  LabeledDataset read_all() {
    LabeledDataset ds;
    ds.manifest = manifest_;
    ds.samples.reserve(manifest_.sample_count);
    for (std::size_t i = 0; i < manifest_.scenarios.size(); ++i)
      for (auto& s : read_scenario_at(i)) ds.samples.push_back(std::move(s));
    return ds;
  }

 private:
  std::filesystem::path dir_;
  Manifest manifest_;
  double bin_width_ = 0.0;
  std::ifstream payload_;
};

inline LabeledDataset read_dataset(const std::filesystem::path& dir) {
  return DatasetReader(dir).read_all();
}

}  // namespace tofforge
