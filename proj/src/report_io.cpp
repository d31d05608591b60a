#include <cmath>
#include <string>

#include <fmt/format.h>

#include "text_util.hpp"
#include "v2xalloc/pipeline.hpp"

namespace v2x {

namespace {

std::string num(double x) { return std::isnan(x) ? std::string("nan") : detail::fmt17(x); }

}  // namespace

void write_train_report(const TrainReport& report, const std::filesystem::path& path) {
    std::string out = "epoch,train_mse,val_mse,epoch_seconds,cumulative_seconds\n";
    out += fmt::format("0,{},{},0,0\n", num(report.initial_train_mse), num(report.initial_val_mse));
    double total = 0.0;
    for (int e = 0; e < report.epochs_run(); ++e) {
        const auto ue = static_cast<std::size_t>(e);
        total += report.epoch_seconds[ue];
        out += fmt::format("{},{},{},{:.6f},{:.6f}\n", e + 1, num(report.train_mse[ue]),
                           num(report.val_mse[ue]), report.epoch_seconds[ue], total);
    }
    detail::write_file(path, out);
}

void write_xval_summary(const std::vector<CrossValCell>& grid, double threshold,
                        const std::filesystem::path& path) {
    std::string out =
        "batch_size,eta,epochs_run,final_train_mse,final_val_mse,threshold,epochs_to_threshold,"
        "seconds_to_threshold,diverged,error\n";
    for (const auto& cell : grid) {
        out += fmt::format("{},{},", cell.batch_size, num(cell.eta));
        if (cell.report) {
            const auto& r = *cell.report;
            const double tr = r.train_mse.empty() ? r.initial_train_mse : r.train_mse.back();
            const double va = r.val_mse.empty() ? r.initial_val_mse : r.val_mse.back();
            const auto epochs = r.epochs_to(threshold);
            const auto secs = r.seconds_to(threshold);
            out += fmt::format("{},{},{},{},{},{},{},", r.epochs_run(), num(tr), num(va),
                               num(threshold), epochs ? std::to_string(*epochs) : "",
                               secs ? fmt::format("{:.6f}", *secs) : "", r.diverged ? 1 : 0);
        } else {
            out += fmt::format(",,,{},,,1,", num(threshold));
        }
        std::string err = cell.error;
        for (char& c : err)
            if (c == ',' || c == '\n') c = ';';
        out += err + "\n";
    }
    detail::write_file(path, out);
}

void write_eval_report(const EvalReport& rep, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const bool timing = !rep.infer_us.empty();

    std::string per = "index,dnn_rate,wmmse_rate,power_mse,infer_us,solve_us\n";
    for (std::size_t i = 0; i < rep.dnn_rate.size(); ++i) {
        per += fmt::format("{},{},{},{},", i, num(rep.dnn_rate[i]), num(rep.wmmse_rate[i]),
                           num(rep.sample_mse[i]));
        per += timing ? fmt::format("{:.3f},{:.3f}\n", rep.infer_us[i], rep.solve_us[i]) : ",\n";
    }
    detail::write_file(dir / "per_sample.csv", per);

    auto write_cdf = [&](const CdfTable& t, const char* name) {
        std::string out = "sum_rate,cdf\n";
        for (std::size_t i = 0; i < t.value.size(); ++i)
            out += fmt::format("{},{}\n", num(t.value[i]), num(t.cumulative[i]));
        detail::write_file(dir / name, out);
    };
    write_cdf(rep.cdf_dnn, "cdf_dnn.csv");
    write_cdf(rep.cdf_wmmse, "cdf_wmmse.csv");

    auto write_pdf = [&](const PdfTable& t, const char* name) {
        std::string out = "bin_center,density\n";
        for (std::size_t b = 0; b < t.density.size(); ++b)
            out += fmt::format("{},{}\n", num(t.bin_center(b)), num(t.density[b]));
        detail::write_file(dir / name, out);
    };
    write_pdf(rep.pdf_dnn, "pdf_dnn.csv");
    write_pdf(rep.pdf_wmmse, "pdf_wmmse.csv");

    std::string sum = "metric,value\n";
    sum += fmt::format("samples,{}\n", rep.dnn_rate.size());
    sum += fmt::format("mean_dnn_rate,{}\n", num(rep.mean_dnn_rate));
    sum += fmt::format("mean_wmmse_rate,{}\n", num(rep.mean_wmmse_rate));
    sum += fmt::format("mean_ratio,{}\n", num(rep.mean_ratio));
    sum += fmt::format("test_mse,{}\n", num(rep.test_mse));
    sum += fmt::format("ks_distance,{}\n", num(rep.ks));
    if (timing) {
        sum += fmt::format("mean_infer_us,{:.3f}\n", rep.mean_infer_us);
        sum += fmt::format("mean_solve_us,{:.3f}\n", rep.mean_solve_us);
        sum += fmt::format("speedup,{:.3f}\n", rep.mean_solve_us / rep.mean_infer_us);
    } else {
        sum += "mean_infer_us,\nmean_solve_us,\nspeedup,\n";
    }
    detail::write_file(dir / "summary.csv", sum);
}

}  // namespace v2x
