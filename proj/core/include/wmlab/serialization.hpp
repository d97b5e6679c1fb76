#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wmlab/evolve.hpp"
#include "wmlab/profiles.hpp"
#include "wmlab/spectrum.hpp"
#include "wmlab/threshold.hpp"

namespace wmlab::io {

/// Write via a temporary file in the same directory and rename. Throws IoError.
void write_atomic(const std::filesystem::path& path, const std::string& content);
/// Whole file as bytes. Throws IoError.
std::string read_file(const std::filesystem::path& path);

// Structured documents are JSON; doubles round-trip exactly.

std::string profile_to_text(const SelfSimilarProfile& p);
SelfSimilarProfile profile_from_text(const std::string& text);
void save_profile(const std::filesystem::path& path, const SelfSimilarProfile& p);
SelfSimilarProfile load_profile(const std::filesystem::path& path);

/// `f1p0` is f'(0) of the profile the spectrum belongs to.
std::string spectrum_to_text(const SpectrumReport& s, double f1p0);
SpectrumReport spectrum_from_text(const std::string& text, double* f1p0 = nullptr);
void save_spectrum(const std::filesystem::path& path, const SpectrumReport& s, double f1p0);
SpectrumReport load_spectrum(const std::filesystem::path& path, double* f1p0 = nullptr);

/// CSV with header tau,h,dV0,dP0,t.
std::string trace_to_csv(const RunTrace& trace);
RunTrace trace_from_csv(const std::string& text);
void save_trace(const std::filesystem::path& path, const RunTrace& trace);
RunTrace load_trace(const std::filesystem::path& path);

/// Long format tau,rho,V,P.
std::string snapshots_to_csv(const std::vector<Snapshot>& snapshots, const GridSpec& grid);

/// s,dU0,tau and, when a fit is given, the model and its mode terms (the
/// stable column includes any harmonics).
std::string similarity_to_csv(const std::vector<SimilaritySample>& series, const FitResult* fit = nullptr);

std::string classification_to_text(const Classification& c);
std::string grid_to_text(const GridSpec& g);

std::string threshold_to_text(const ThresholdResult& r, const std::string& manifest_id);
std::string fit_to_text(const FitResult& f, const std::string& manifest_id);
FitResult fit_from_text(const std::string& text);
std::string free_rate_fit_to_text(const FreeRateFit& f, const std::string& manifest_id);

}  // namespace wmlab::io
