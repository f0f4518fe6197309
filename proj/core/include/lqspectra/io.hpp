#ifndef LQSPECTRA_IO_HPP
#define LQSPECTRA_IO_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lqspectra/entropy.hpp"
#include "lqspectra/ifs.hpp"
#include "lqspectra/manifolds.hpp"
#include "lqspectra/measure.hpp"
#include "lqspectra/packing.hpp"
#include "lqspectra/spectra.hpp"

namespace lqs {

// A parsed input file: either a CIFS (maps + probs + seed ball) or a direct
// atom list, plus an optional chart block marking the system liftable.
struct ParsedInput {
  std::optional<IFSSpec> ifs;
  std::optional<AtomicMeasure> atoms;
  std::shared_ptr<const StereographicChart> chart;
  std::string format_note;
};

// Reads the versioned JSON spec format (format: 1).  Throws ParseError
// naming the offending field.
ParsedInput read_input_file(const std::string& path);
ParsedInput parse_input_json(const std::string& text, const std::string& origin);

// CSV / JSON emitters.  All doubles print with %.17g so identical runs are
// byte-identical.
void write_spectrum_csv(const std::string& path, const SpectrumTable& table);
void write_spectrum_json(const std::string& path, const SpectrumTable& table,
                         const std::vector<std::pair<std::string, std::string>>& meta);
void write_entropy_csv(const std::string& path, const EntropyTrace& trace);
void write_entropy_json(const std::string& path, const EntropyTrace& trace,
                        const std::vector<std::pair<std::string, std::string>>& meta);
void write_atoms_csv(const std::string& path, const AtomicMeasure& mu);
void write_packing_csv(const std::string& path, const Packing& packing, const AtomicMeasure& mu);
void write_cells_csv(const std::string& path, const MaximalPartition& part,
                     const AtomicMeasure& mu);

// Re-associates an exported packing with the measure's atoms: each center
// must coincide with a support atom within 4x resolution.  The returned
// check reports centers that fail to land on the support.
std::pair<Packing, CheckResult> import_packing_csv(const std::string& path,
                                                   const AtomicMeasure& mu);

struct NamedReport {
  std::string object;
  VerifyReport report;
};

void write_verify_json(const std::string& path, const std::vector<NamedReport>& reports,
                       const std::vector<std::pair<std::string, double>>& constants);

std::string format_double(double v);

}  // namespace lqs

#endif
