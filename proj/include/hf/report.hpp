#pragma once

#include "hf/asymptotics.hpp"
#include "hf/gauss.hpp"
#include "hf/helicoid_fit.hpp"
#include "hf/io.hpp"
#include "hf/mse_solver.hpp"
#include "hf/sheet_analysis.hpp"

namespace hf {

/// Finite doubles as numbers; infinities and NaN as "inf", "-inf", "nan".
nlohmann::json num(double x);
nlohmann::json num_list(const std::vector<double>& v);
nlohmann::json complex_to_json(Complex z);

nlohmann::json solve_report_to_json(const SolveReport& r);
std::string solve_history_csv(const SolveReport& r);

nlohmann::json certificate_to_json(const SheetCertificate& c);
std::string flatness_csv(const FlatnessField& f);

nlohmann::json blowup_to_json(const BlowUpReport& r);

nlohmann::json laurent_to_json(const LaurentFit& f);
std::string laurent_csv(const LaurentFit& f);

nlohmann::json osc_to_json(const std::vector<OscReport>& rows, double C, double epsilon);
std::string osc_csv(const std::vector<OscReport>& rows, double C, double epsilon);

nlohmann::json spiral_to_json(const SpiralReport& r);
std::string spiral_csv(const SpiralReport& r);

nlohmann::json gauss_to_json(const GaussField& f, double identity, double excess);
std::string gauss_csv(const GaussField& f);
nlohmann::json log_branch_to_json(const LogBranch& b, const PolarGrid& grid);

nlohmann::json levels_to_json(const std::vector<LevelSetTrace>& traces);
std::string levels_csv(const std::vector<LevelSetTrace>& traces);

nlohmann::json labeling_to_json(const DecompositionLabeling& d);
std::string labeling_csv(const DecompositionLabeling& d, const MeshPatch& m);

nlohmann::json model_to_json(const HelicoidModel& h);
HelicoidModel model_from_json(const nlohmann::json& j);
nlohmann::json fit_to_json(const HelicoidFit& f);
nlohmann::json distortion_to_json(const DistortionReport& r);
std::string distortion_csv(const DistortionReport& r);

nlohmann::json embeddedness_to_json(const EmbeddednessVerdict& v, const WeierstrassAlpha& a, double t0, double t1,
                                    int n, double tol);

/// Static line chart: one or more (x, y) series, optional log axes.
struct ChartSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};
std::string svg_line_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                           const std::vector<ChartSeries>& series, bool log_x = false, bool log_y = false);

}  // namespace hf
