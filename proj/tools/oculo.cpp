// oculo: command-line front end for session analysis, cohort reports and
// synthetic data generation.

#include <CLI11.hpp>

#include "oculo/oculo.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace oculo;

namespace {

enum Exit { kOk = 0, kUsage = 1, kParse = 2, kAnalysis = 3, kAllFailed = 4 };

int exit_code_for(const Error& e) {
    if (e.code() == ErrorCode::AllSessionsFailed) return kAllFailed;
    switch (e.code()) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::BadWindow:
    case ErrorCode::BadOrder:
        return kUsage;
    default:
        break;
    }
    return is_parse_error(e.code()) ? kParse : kAnalysis;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes every file to a sibling temp path first and renames only once all
/// writes succeeded, so a failure leaves no partial outputs behind.
void write_files_atomically(const std::vector<std::pair<fs::path, std::string>>& files) {
    std::vector<fs::path> temps;
    auto cleanup = [&] {
        std::error_code ec;
        for (const auto& t : temps) fs::remove(t, ec);
    };
    for (const auto& [path, content] : files) {
        fs::path tmp = path;
        tmp += ".tmp";
        temps.push_back(tmp);
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.close();
        if (!out) {
            cleanup();
            throw Error(ErrorCode::IoError, "cannot write " + path.string());
        }
    }
    for (std::size_t i = 0; i < files.size(); ++i) {
        std::error_code ec;
        fs::rename(temps[i], files[i].first, ec);
        if (ec) {
            cleanup();
            throw Error(ErrorCode::IoError, "cannot rename into " + files[i].first.string());
        }
    }
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::IoError, "cannot create directory " + dir.string());
}

struct SessionInput {
    fs::path binary;
    std::vector<fs::path> logs;
};

/// A session directory holds session.bin plus stimulus_*.log files.
SessionInput discover_session(const fs::path& dir) {
    SessionInput in;
    in.binary = dir / "session.bin";
    if (!fs::is_regular_file(in.binary)) throw Error(ErrorCode::IoError, "missing " + in.binary.string());
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (entry.is_regular_file() && name.starts_with("stimulus_") && name.ends_with(".log")) {
            in.logs.push_back(entry.path());
        }
    }
    std::sort(in.logs.begin(), in.logs.end());
    return in;
}

AnalysisResult analyze_input(const SessionInput& in, const AnalysisConfig& cfg) {
    const auto bytes = read_file(in.binary);
    const auto session = parse_binary_session(
        std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
    std::vector<StimulusTrack> tracks;
    for (const auto& log : in.logs) {
        auto track = parse_stimulus_log(read_file(log));
        if (!track.events.empty()) tracks.push_back(std::move(track));
    }
    std::sort(tracks.begin(), tracks.end(), [](const auto& a, const auto& b) {
        return a.events.front().timestamp_us < b.events.front().timestamp_us;
    });
    return extract_features(session, tracks, cfg);
}

void add_analysis_flags(CLI::App* cmd, AnalysisConfig& cfg) {
    cmd->add_option("--sg-window", cfg.filter.window, "Savitzky-Golay window length (odd)")->capture_default_str();
    cmd->add_option("--sg-order", cfg.filter.polyorder, "Savitzky-Golay polynomial order")->capture_default_str();
    cmd->add_option("--fov-half-deg", cfg.fov_half_angle_deg, "Half field-of-view angle in degrees")
        ->capture_default_str();
    cmd->add_option("--amp-factor", cfg.detection.amplitude_factor, "Saccade threshold as a fraction of trace std")
        ->capture_default_str();
    cmd->add_option("--baseline-ms", cfg.detection.baseline_window_ms, "Pre-stimulus baseline window")
        ->capture_default_str();
    cmd->add_option("--fix-threshold-frac", cfg.fixation.threshold_fraction,
                    "Fixation threshold as a fraction of cleaned speed std")
        ->capture_default_str();
    cmd->add_option("--min-fix-ms", cfg.fixation.min_fixation_ms, "Shortest accepted fixation")->capture_default_str();
    cmd->add_option("--zscore-cutoff", cfg.fixation.zscore_cutoff, "Modified Z-score outlier cutoff")
        ->capture_default_str();
    cmd->add_option("--speed-radius", cfg.fixation.speed_radius_samples, "Peak speed search radius in samples")
        ->capture_default_str();
}

void print_features(const FeatureSet& f, std::ostream& out) {
    for (std::size_t p = 0; p < kFeatureCount; ++p) {
        out << kFeatureCodes[p] << ": ";
        if (const auto& v = feature_at(f, p)) {
            out << detail::format_double(*v);
        } else {
            out << "ABSENT";
        }
        out << "\n";
    }
}

// --------------------------------------------------------------------------

struct AnalyzeArgs {
    std::string session_dir;
    std::string session_file;
    std::vector<std::string> stim_logs;
    std::string out_dir;
    AnalysisConfig cfg;
};

int run_analyze(const AnalyzeArgs& a) {
    SessionInput in;
    fs::path out_dir;
    if (!a.session_dir.empty()) {
        in = discover_session(a.session_dir);
        out_dir = a.out_dir.empty() ? fs::path(a.session_dir) : fs::path(a.out_dir);
    } else {
        in.binary = a.session_file;
        for (const auto& s : a.stim_logs) in.logs.emplace_back(s);
        out_dir = a.out_dir.empty() ? fs::path(".") : fs::path(a.out_dir);
    }
    const auto result = analyze_input(in, a.cfg);
    ensure_dir(out_dir);
    write_files_atomically({{out_dir / "features.csv", write_feature_report(result.features, ReportFormat::Csv)},
                            {out_dir / "features.json", write_feature_report(result.features, ReportFormat::Json)}});
    print_features(result.features, std::cout);
    for (const auto& note : result.notes) std::cerr << "note: " << note << "\n";
    return kOk;
}

// --------------------------------------------------------------------------

std::map<std::string, Group> load_groups(const std::string& path) {
    std::map<std::string, Group> groups;
    for (auto& [id, g] : parse_group_file(read_file(path))) groups[id] = g;
    return groups;
}

std::string csv_field(std::string s) {
    for (char& c : s) {
        if (c == ',' || c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

/// Normalizes, aggregates and writes cohort.csv, boxplots.csv, boxplots.svg.
void write_cohort_reports(const CohortTable& table, const fs::path& out_dir) {
    std::vector<std::string_view> degenerate;
    const auto normalized = normalize_cohort(table, true, &degenerate);
    for (auto code : degenerate) std::cerr << "note: " << code << " has zero range across the cohort; mapped to 0\n";
    const auto stats = boxplot_stats(normalized, true);
    write_files_atomically({{out_dir / "cohort.csv", cohort_csv(table)},
                            {out_dir / "boxplots.csv", boxplots_csv(stats)},
                            {out_dir / "boxplots.svg", boxplots_svg(stats)}});
}

struct BatchArgs {
    std::string cohort_dir;
    std::string groups_file;
    std::string out_dir;
    unsigned jobs = 0;
    AnalysisConfig cfg;
};

int run_batch(const BatchArgs& a) {
    const auto groups = load_groups(a.groups_file);
    std::vector<fs::path> sessions;
    if (!fs::is_directory(a.cohort_dir)) throw Error(ErrorCode::IoError, "not a directory: " + a.cohort_dir);
    for (const auto& entry : fs::directory_iterator(a.cohort_dir)) {
        if (entry.is_directory()) sessions.push_back(entry.path());
    }
    std::sort(sessions.begin(), sessions.end());

    const fs::path out_dir = a.out_dir.empty() ? fs::path(a.cohort_dir) / "report" : fs::path(a.out_dir);
    ensure_dir(out_dir / "features");

    struct Outcome {
        std::optional<FeatureSet> features;
        std::string error_name;
        std::string detail;
    };
    std::vector<Outcome> outcomes(sessions.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < sessions.size(); i = next++) {
            const auto id = sessions[i].filename().string();
            try {
                if (!groups.contains(id)) throw Error(ErrorCode::UnknownGroup, "no group assigned to " + id);
                outcomes[i].features = analyze_input(discover_session(sessions[i]), a.cfg).features;
            } catch (const Error& e) {
                outcomes[i].error_name = std::string(e.name());
                outcomes[i].detail = e.what();
            } catch (const std::exception& e) {
                outcomes[i].error_name = "IoError";
                outcomes[i].detail = e.what();
            }
        }
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(a.jobs ? a.jobs : std::thread::hardware_concurrency(),
                                                          static_cast<unsigned>(std::max<std::size_t>(1, sessions.size()))));
    std::vector<std::thread> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    CohortTable table;
    std::string failures = "session_id,error,detail\n";
    std::size_t failed = 0;
    for (std::size_t i = 0; i < sessions.size(); ++i) {
        const auto id = sessions[i].filename().string();
        if (!outcomes[i].features) {
            ++failed;
            failures += csv_field(id) + "," + outcomes[i].error_name + "," + csv_field(outcomes[i].detail) + "\n";
            continue;
        }
        write_files_atomically({{out_dir / "features" / (id + ".csv"),
                                 write_feature_report(*outcomes[i].features, ReportFormat::Csv)}});
        table.rows.push_back({id, groups.at(id), *outcomes[i].features});
    }
    write_files_atomically({{out_dir / "failures.csv", failures}});
    std::cout << "analyzed " << table.rows.size() << " of " << sessions.size() << " sessions, " << failed
              << " failed\n";
    if (table.rows.empty()) throw Error(ErrorCode::AllSessionsFailed, "no session in " + a.cohort_dir + " could be analyzed");
    write_cohort_reports(table, out_dir);
    return kOk;
}

// --------------------------------------------------------------------------

struct ReportArgs {
    std::string features_dir;
    std::string groups_file;
    std::string out_dir;
};

int run_report(const ReportArgs& a) {
    const auto groups = load_groups(a.groups_file);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(a.features_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    CohortTable table;
    for (const auto& f : files) {
        const auto id = f.stem().string();
        const auto it = groups.find(id);
        if (it == groups.end()) {
            std::cerr << "note: skipping " << id << ", no group assigned\n";
            continue;
        }
        table.rows.push_back({id, it->second, read_feature_report(read_file(f), ReportFormat::Csv)});
    }
    if (table.rows.empty()) throw Error(ErrorCode::AllSessionsFailed, "no grouped feature files in " + a.features_dir);
    const fs::path out_dir = a.out_dir.empty() ? fs::path(".") : fs::path(a.out_dir);
    ensure_dir(out_dir);
    write_cohort_reports(table, out_dir);
    return kOk;
}

// --------------------------------------------------------------------------

struct SynthArgs {
    std::string out_dir;
    std::string task = "all";
    std::uint64_t seed = 42;
    std::string subject = "healthy";
    std::optional<int> repetitions;
    int rate_hz = 30;
    std::optional<double> latency_ms;
    std::optional<double> latency_sd_ms;
    std::optional<double> gain;
    std::optional<double> noise_deg;
    std::optional<double> anti_error;
    std::optional<double> memory_error;
    std::optional<double> peak_speed;
};

std::vector<TaskKind> synth_tasks(const std::string& name) {
    if (name == "all") return {TaskKind::Reflex, TaskKind::Anti, TaskKind::MemoryMain, TaskKind::Pursuit};
    if (name == "reflex") return {TaskKind::Reflex};
    if (name == "anti") return {TaskKind::Anti};
    if (name == "memory-training") return {TaskKind::MemoryTraining};
    if (name == "memory") return {TaskKind::MemoryMain};
    if (name == "pursuit") return {TaskKind::Pursuit};
    throw Error(ErrorCode::InvalidConfig, "unknown task " + name);
}

int run_synth(SynthArgs a) {
    if (const char* env = std::getenv("OCULO_SEED")) {
        try {
            std::size_t used = 0;
            a.seed = std::stoull(env, &used, 0);
            if (env[used] != '\0') throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidConfig, std::string("OCULO_SEED is not an integer: ") + env);
        }
    }
    SubjectModel subject;
    if (a.subject == "healthy") {
        subject = SubjectModel::healthy();
    } else if (a.subject == "pd") {
        subject = SubjectModel::parkinsonian();
    } else if (a.subject == "ideal") {
        subject = SubjectModel::ideal();
    } else {
        throw Error(ErrorCode::InvalidConfig, "unknown subject preset " + a.subject);
    }
    if (a.latency_ms) subject.latency_mean_ms = *a.latency_ms;
    if (a.latency_sd_ms) subject.latency_sd_ms = *a.latency_sd_ms;
    if (a.gain) subject.saccade_gain = *a.gain;
    if (a.noise_deg) subject.fixation_noise_deg = *a.noise_deg;
    if (a.anti_error) subject.anti_error_prob = *a.anti_error;
    if (a.memory_error) subject.memory_error_prob = *a.memory_error;
    if (a.peak_speed) subject.peak_speed_deg_per_ms = *a.peak_speed;

    std::vector<StimulusTrack> tracks;
    std::uint64_t start = 1'000'000;
    for (TaskKind task : synth_tasks(a.task)) {
        auto cfg = ProtocolConfig::for_task(task, derive_seed(a.seed, static_cast<std::uint64_t>(task)));
        if (a.repetitions) cfg.repetitions = *a.repetitions;
        cfg.rate_hz = a.rate_hz;
        cfg.start_us = start;
        tracks.push_back(generate_protocol(cfg));
        start = tracks.back().events.back().timestamp_us + 3'000'000;
    }
    const auto syn = synthesize_gaze(tracks, subject, derive_seed(a.seed, 100), a.rate_hz);

    const fs::path out(a.out_dir);
    ensure_dir(out);
    const auto bytes = serialize_binary_session(syn.session);
    std::vector<std::pair<fs::path, std::string>> files;
    files.emplace_back(out / "session.bin", std::string(bytes.begin(), bytes.end()));
    for (const auto& t : tracks) {
        files.emplace_back(out / ("stimulus_" + std::string(task_name(t.task)) + ".log"), write_stimulus_log(t));
    }
    files.emplace_back(out / "ground_truth.csv", ground_truth_csv(syn.truth));
    write_files_atomically(files);
    std::cout << "wrote " << files.size() << " files to " << out.string() << "\n";
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Oculomotor session analysis"};
    app.require_subcommand(1);

    AnalyzeArgs analyze;
    auto* cmd_analyze = app.add_subcommand("analyze", "Extract the eleven parameters from one session");
    auto* dir_opt = cmd_analyze->add_option("session_dir", analyze.session_dir,
                                            "Directory with session.bin and stimulus_*.log");
    auto* file_opt = cmd_analyze->add_option("--session", analyze.session_file, "Binary session file");
    cmd_analyze->add_option("--stim", analyze.stim_logs, "Stimulus log (repeatable)")->needs(file_opt);
    dir_opt->excludes(file_opt);
    cmd_analyze->add_option("--out", analyze.out_dir, "Output directory (default: the session directory)");
    add_analysis_flags(cmd_analyze, analyze.cfg);

    BatchArgs batch;
    auto* cmd_batch = app.add_subcommand("batch", "Analyze every session directory of a cohort");
    cmd_batch->add_option("cohort_dir", batch.cohort_dir, "Directory of session directories")->required();
    cmd_batch->add_option("--groups", batch.groups_file, "subject_id,group file")->required();
    cmd_batch->add_option("--out", batch.out_dir, "Output directory (default: <cohort_dir>/report)");
    cmd_batch->add_option("-j,--jobs", batch.jobs, "Worker threads (default: hardware concurrency)");
    add_analysis_flags(cmd_batch, batch.cfg);

    SynthArgs synth;
    auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic session with ground truth");
    cmd_synth->add_option("--out", synth.out_dir, "Output session directory")->required();
    cmd_synth->add_option("--task", synth.task, "reflex|anti|memory-training|memory|pursuit|all")
        ->check(CLI::IsMember({"reflex", "anti", "memory-training", "memory", "pursuit", "all"}))
        ->capture_default_str();
    cmd_synth->add_option("--seed", synth.seed, "Random seed (OCULO_SEED overrides)")->capture_default_str();
    cmd_synth->add_option("--subject", synth.subject, "Subject preset: healthy|pd|ideal")
        ->check(CLI::IsMember({"healthy", "pd", "ideal"}))
        ->capture_default_str();
    cmd_synth->add_option("--reps", synth.repetitions, "Repetitions per task");
    cmd_synth->add_option("--rate", synth.rate_hz, "Sampling rate in Hz")->capture_default_str();
    cmd_synth->add_option("--latency-ms", synth.latency_ms, "Mean saccade latency");
    cmd_synth->add_option("--latency-sd-ms", synth.latency_sd_ms, "Latency standard deviation");
    cmd_synth->add_option("--gain", synth.gain, "Saccade gain (1 = accurate)");
    cmd_synth->add_option("--noise-deg", synth.noise_deg, "Fixation noise standard deviation");
    cmd_synth->add_option("--anti-error", synth.anti_error, "Antisaccade direction error probability");
    cmd_synth->add_option("--memory-error", synth.memory_error, "Memory-guided error probability");
    cmd_synth->add_option("--peak-speed", synth.peak_speed, "Saccade peak speed in deg/ms");

    ReportArgs report;
    auto* cmd_report = app.add_subcommand("report", "Boxplot statistics from per-session feature files");
    cmd_report->add_option("features_dir", report.features_dir, "Directory of <subject>.csv feature files")
        ->required()
        ->check(CLI::ExistingDirectory);
    cmd_report->add_option("--groups", report.groups_file, "subject_id,group file")->required();
    cmd_report->add_option("--out", report.out_dir, "Output directory (default: current directory)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (cmd_analyze->parsed()) {
            if (analyze.session_dir.empty() && analyze.session_file.empty()) {
                std::cerr << "error: analyze needs a session directory or --session\n";
                return kUsage;
            }
            return run_analyze(analyze);
        }
        if (cmd_batch->parsed()) return run_batch(batch);
        if (cmd_synth->parsed()) return run_synth(synth);
        if (cmd_report->parsed()) return run_report(report);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: IoError: " << e.what() << "\n";
        return kParse;
    }
    return kUsage;
}
