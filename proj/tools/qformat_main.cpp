// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qformat/json_io.hpp"
#include "qformat/sweep.hpp"

namespace fs = std::filesystem;

namespace {

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty())
        std::cout << text;
    else
        qformat::write_text_file(out_path, text);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"design, generate and evaluate low-bit quantization datatypes"};
    app.require_subcommand(1);

    // ---- codebook ----
    auto* codebook_cmd = app.add_subcommand("codebook", "codebook generation and lookup");
    codebook_cmd->require_subcommand(1);

    std::string gen_family;
    int gen_bits = 4;
    double gen_nu = 0.0;
    bool gen_has_nu = false;
    std::string gen_out;
    auto* gen_cmd = codebook_cmd->add_subcommand("gen", "derive a quantile codebook");
    gen_cmd->add_option("--family", gen_family, "sf or nf")->required();
    gen_cmd->add_option("--bits", gen_bits, "bit width (3, 4 or 5)")->required();
    gen_cmd->add_option("--nu", gen_nu, "degrees of freedom (sf only)")
        ->each([&](const std::string&) { gen_has_nu = true; });
    gen_cmd->add_option("--out", gen_out, "output file (default stdout)");

    std::string builtin_name;
    std::string builtin_out;
    auto* builtin_cmd = codebook_cmd->add_subcommand("builtin", "emit a fixed value table");
    builtin_cmd->add_option("--name", builtin_name, "builtin codebook name")->required();
    builtin_cmd->add_option("--out", builtin_out, "output file (default stdout)");

    auto* list_cmd = codebook_cmd->add_subcommand("list", "list builtin codebook names");

    // ---- quantize ----
    std::string q_tensor, q_codebook, q_block = "128", q_clip = "none", q_out;
    auto* quantize_cmd = app.add_subcommand("quantize", "block-quantize a tensor file");
    quantize_cmd->add_option("--tensor", q_tensor, "input tensor (.npy)")->required();
    quantize_cmd->add_option("--codebook", q_codebook, "builtin name or codebook JSON file")
        ->required();
    quantize_cmd->add_option("--block", q_block, "block size, 'cw' or 'tensor'")->required();
    quantize_cmd->add_option("--clip", q_clip, "none or mse");
    quantize_cmd->add_option("--out", q_out, "report file (default stdout)");

    // ---- profile ----
    std::string p_dir, p_out;
    std::uint64_t p_seed = 0;
    auto* profile_cmd = app.add_subcommand("profile", "fit t/normal distributions to tensors");
    profile_cmd->add_option("--dir", p_dir, "directory of .npy tensors")->required();
    profile_cmd->add_option("--seed", p_seed, "downsampling seed")->required();
    profile_cmd->add_option("--out", p_out, "CSV file (default stdout)");

    // ---- sample ----
    std::string s_dist, s_out;
    double s_nu = 0.0, s_scale = 1.0;
    bool s_has_nu = false;
    std::uint64_t s_seed = 0;
    std::size_t s_rows = 0, s_cols = 0;
    auto* sample_cmd = app.add_subcommand("sample", "write a synthetic tensor file");
    sample_cmd->add_option("--dist", s_dist, "t or normal")->required();
    sample_cmd->add_option("--nu", s_nu, "degrees of freedom (t only)")
        ->each([&](const std::string&) { s_has_nu = true; });
    sample_cmd->add_option("--rows", s_rows, "row count")->required();
    sample_cmd->add_option("--cols", s_cols, "column count")->required();
    sample_cmd->add_option("--scale", s_scale, "scale factor (default 1.0)");
    sample_cmd->add_option("--seed", s_seed, "random seed")->required();
    sample_cmd->add_option("--out", s_out, "output tensor file")->required();

    // ---- sweep ----
    std::string w_config, w_out;
    auto* sweep_cmd = app.add_subcommand("sweep", "run a codebook x block x clip cross-product");
    sweep_cmd->add_option("--config", w_config, "sweep config JSON")->required();
    sweep_cmd->add_option("--out", w_out, "CSV file (default config 'output', then stdout)");

    // ---- pareto ----
    std::string r_quality, r_out;
    auto* pareto_cmd = app.add_subcommand("pareto", "join quality scores with hardware costs");
    pareto_cmd->add_option("--quality", r_quality, "CSV with header format,quality")->required();
    pareto_cmd->add_option("--out", r_out, "CSV file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen_cmd->parsed()) {
            qformat::Codebook cb;
            if (gen_family == "sf") {
                if (!gen_has_nu) {
                    std::cerr << "codebook gen: --nu is required for --family sf\n";
                    return 1;
                }
                cb = qformat::gen_student_float(gen_bits, gen_nu);
            } else if (gen_family == "nf") {
                cb = qformat::gen_normal_float(gen_bits);
            } else {
                std::cerr << "codebook gen: unknown family '" << gen_family
                          << "' (expected sf or nf)\n";
                return 1;
            }
            emit(qformat::codebook_to_json(cb), gen_out);
        } else if (builtin_cmd->parsed()) {
            emit(qformat::codebook_to_json(qformat::builtin_codebook(builtin_name)),
                 builtin_out);
        } else if (list_cmd->parsed()) {
            std::string out;
            for (const auto& name : qformat::builtin_names()) out += name + "\n";
            std::cout << out;
        } else if (quantize_cmd->parsed()) {
            const qformat::Tensor tensor = qformat::read_tensor(q_tensor);
            const qformat::Codebook cb = qformat::resolve_codebook(q_codebook);
            const qformat::QuantScheme scheme = qformat::make_scheme(cb, q_block, q_clip);
            const qformat::QuantReport report =
                qformat::quantize_to_report(q_tensor, tensor, scheme, q_block, q_clip);
            emit(qformat::report_to_json(report), q_out);
        } else if (profile_cmd->parsed()) {
            std::vector<std::string> paths;
            for (const auto& entry : fs::directory_iterator(p_dir))
                if (entry.is_regular_file() && entry.path().extension() == ".npy")
                    paths.push_back(entry.path().string());
            std::sort(paths.begin(), paths.end());
            if (paths.empty()) {
                std::cerr << "profile: no .npy tensors in '" << p_dir << "'\n";
                return 1;
            }
            std::vector<qformat::Tensor> tensors;
            tensors.reserve(paths.size());
            for (const auto& path : paths) tensors.push_back(qformat::read_tensor(path));
            std::vector<qformat::NamedTensor> named;
            for (std::size_t i = 0; i < paths.size(); ++i)
                named.push_back({fs::path(paths[i]).filename().string(), &tensors[i]});
            emit(qformat::profile_csv(qformat::profile_tensor_set(named, p_seed)), p_out);
        } else if (sample_cmd->parsed()) {
            std::vector<double> samples;
            if (s_dist == "t") {
                if (!s_has_nu) {
                    std::cerr << "sample: --nu is required for --dist t\n";
                    return 1;
                }
                samples = qformat::sample_t(s_rows * s_cols, s_nu, s_scale, s_seed);
            } else if (s_dist == "normal") {
                samples = qformat::sample_normal(s_rows * s_cols, s_scale, s_seed);
            } else {
                std::cerr << "sample: unknown distribution '" << s_dist
                          << "' (expected t or normal)\n";
                return 1;
            }
            qformat::Tensor tensor(s_rows, s_cols);
            tensor.data = std::move(samples);
            qformat::write_tensor(s_out, tensor);
        } else if (sweep_cmd->parsed()) {
            const qformat::SweepConfig cfg =
                qformat::parse_sweep_config(qformat::read_text_file(w_config));
            const auto rows = qformat::run_sweep(cfg);
            const std::string csv = qformat::sweep_csv(rows);
            emit(csv, w_out.empty() ? cfg.output : w_out);
        } else if (pareto_cmd->parsed()) {
            const auto quality =
                qformat::parse_quality_csv(qformat::read_text_file(r_quality));
            emit(qformat::pareto_csv(quality), r_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
